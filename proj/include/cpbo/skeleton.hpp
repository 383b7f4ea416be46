#pragma once

#include <set>
#include <string>
#include <vector>

#include "cpbo/binding.hpp"

namespace cpbo {

enum class Layer { decision, transition };

/// One typed operator of a skeleton. Inputs reference task constants or
/// outputs of earlier operators; decision-layer operators produce exactly one
/// decision variable.
struct Operator {
    std::string name;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    Layer layer = Layer::transition;
};

/// Transitive dependency closure of one operator: which earlier operators
/// produced its (direct and indirect) inputs, and which task constants feed
/// the chain. Constants are reported separately from producing operators.
struct DependencyChain {
    std::vector<std::pair<std::string, std::string>> producers;  // (operator name, identifier)
    std::vector<std::string> constants;
};

/// A task skeleton: an ordered operator list alternating decision and
/// transition layers (decision first), plus the decision variables in layer
/// order. Validated and immutable after construction; safe to share across
/// concurrent searches.
class Skeleton {
  public:
    /// Empty placeholder; only valid as an assignment target.
    Skeleton() = default;

    /// Validates layering, wiring and acyclicity; throws std::invalid_argument
    /// with a diagnostic on any violation. `constants` lists the identifiers
    /// the owning task declares (bodies, regions, fixed poses, configs,
    /// grasp-direction literals).
    Skeleton(std::vector<Operator> operators, std::vector<DecisionVar> decision_vars,
             std::set<std::string> constants);

    const std::vector<Operator>& operators() const { return operators_; }
    const std::vector<DecisionVar>& decision_vars() const { return decision_vars_; }
    int total_depth() const { return static_cast<int>(decision_vars_.size()); }
    const std::set<std::string>& constants() const { return constants_; }

    const Operator& op(int occurrence) const { return operators_.at(static_cast<size_t>(occurrence)); }
    int op_count() const { return static_cast<int>(operators_.size()); }

    /// First occurrence index of an operator with this name, or -1.
    int find_op(const std::string& name) const;

    /// Index of a decision variable by name, or -1.
    int var_index(const std::string& name) const;

    /// Occurrence index of the decision operator that produces variable `var`.
    int producer_of_var(int var) const { return var_producer_occ_.at(static_cast<size_t>(var)); }

    /// Occurrence index of the operator producing `identifier`, or -1 when it
    /// is a constant.
    int producer_of(const std::string& identifier) const;

    /// Decision layer of an operator occurrence: decision ops belong to the
    /// layer they open; transition ops to the most recent decision layer.
    /// 1-based; see `total_depth`.
    int layer_of(int occurrence) const { return op_layer_.at(static_cast<size_t>(occurrence)); }

    DependencyChain dependency_chain(const std::string& op_name) const;
    DependencyChain dependency_chain(int occurrence) const;

    /// Decision-variable indices transitively feeding an occurrence, in
    /// variable order.
    std::vector<int> chain_decision_vars(int occurrence) const;

    /// Transition-layer occurrences strictly between the decisions and the
    /// given occurrence on the dependency chain, in skeleton order.
    std::vector<int> chain_connections(int occurrence) const;

    /// Constants on the transitive chain (direct inputs included), sorted.
    std::vector<std::string> chain_constants(int occurrence) const;

  private:
    void validate();
    std::vector<int> chain_occurrences(int occurrence) const;  // producers, transitive

    std::vector<Operator> operators_;
    std::vector<DecisionVar> decision_vars_;
    std::set<std::string> constants_;
    std::vector<int> op_layer_;
    std::vector<int> var_producer_occ_;
};

/// Decision variables in tree-layer order.
inline const std::vector<DecisionVar>& decision_vars(const Skeleton& s) { return s.decision_vars(); }

}  // namespace cpbo
