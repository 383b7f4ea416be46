#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cpbo {

enum class VarKind { discrete, continuous };

/// One open motion parameter of a skeleton: either a finite symbol set or a
/// point in the unit box [0,1]^dim. `type_tag` is the semantic label used in
/// causal-graph vertices (e.g. "grasp-dir", "place-pose").
struct DecisionVar {
    std::string name;
    VarKind kind = VarKind::discrete;
    std::vector<std::string> discrete_domain;
    int continuous_dim = 0;
    std::string type_tag;

    bool is_discrete() const { return kind == VarKind::discrete; }
};

/// A concrete value for one decision variable. Discrete values are stored as
/// an index into the variable's domain; continuous values as unit-box
/// coordinates.
struct Binding {
    int symbol = -1;
    std::vector<double> point;

    bool is_discrete() const { return symbol >= 0; }

    static Binding discrete(int symbol_index) {
        Binding b;
        b.symbol = symbol_index;
        return b;
    }
    static Binding continuous(std::vector<double> coords) {
        Binding b;
        b.point = std::move(coords);
        return b;
    }

    bool operator==(const Binding& o) const {
        return symbol == o.symbol && point == o.point;
    }
};

using BindingVector = std::vector<Binding>;

inline bool in_domain(const DecisionVar& var, const Binding& b) {
    if (var.is_discrete()) {
        return b.is_discrete() && b.symbol < static_cast<int>(var.discrete_domain.size());
    }
    if (b.is_discrete() || static_cast<int>(b.point.size()) != var.continuous_dim) return false;
    for (double v : b.point)
        if (v < 0.0 || v > 1.0) return false;
    return true;
}

inline std::string format_binding(const DecisionVar& var, const Binding& b) {
    if (var.is_discrete()) {
        if (!b.is_discrete()) return "<invalid>";
        return var.discrete_domain[static_cast<size_t>(b.symbol)];
    }
    std::string s = "(";
    for (size_t i = 0; i < b.point.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(b.point[i]);
    }
    return s + ")";
}

}  // namespace cpbo
