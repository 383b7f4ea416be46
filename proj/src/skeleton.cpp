#include "cpbo/skeleton.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace cpbo {

Skeleton::Skeleton(std::vector<Operator> operators, std::vector<DecisionVar> decision_vars,
                   std::set<std::string> constants)
    : operators_(std::move(operators)),
      decision_vars_(std::move(decision_vars)),
      constants_(std::move(constants)) {
    validate();
}

void Skeleton::validate() {
    if (operators_.empty()) throw std::invalid_argument("skeleton: empty operator list");

    // Layer alternation: decision, transition, decision, ... starting with a
    // decision layer. A decision layer is a single operator producing exactly
    // one decision variable; adjacent decision operators are rejected (two
    // decision layers with no transition between them are not supported).
    op_layer_.assign(operators_.size(), 0);
    int layer = 0;
    bool last_was_decision = false;
    size_t next_var = 0;
    for (size_t i = 0; i < operators_.size(); ++i) {
        const Operator& op = operators_[i];
        if (op.layer == Layer::decision) {
            if (i == 0 && layer != 0) throw std::invalid_argument("skeleton: internal");
            if (last_was_decision)
                throw std::invalid_argument("skeleton: adjacent decision layers at operator '" +
                                            op.name + "' (no transition between decisions)");
            if (op.outputs.size() != 1)
                throw std::invalid_argument("skeleton: decision operator '" + op.name +
                                            "' must produce exactly one decision variable");
            if (next_var >= decision_vars_.size() ||
                decision_vars_[next_var].name != op.outputs[0])
                throw std::invalid_argument("skeleton: decision outputs do not match the declared "
                                            "decision variables in order (at '" + op.name + "')");
            ++layer;
            ++next_var;
            last_was_decision = true;
        } else {
            if (layer == 0)
                throw std::invalid_argument("skeleton: first layer must be a decision layer");
            last_was_decision = false;
        }
        op_layer_[i] = layer;
    }
    if (next_var != decision_vars_.size())
        throw std::invalid_argument("skeleton: more decision variables declared than produced");

    // Decision-variable sanity.
    for (const DecisionVar& v : decision_vars_) {
        const bool disc = !v.discrete_domain.empty();
        const bool cont = v.continuous_dim > 0;
        if (disc == cont)
            throw std::invalid_argument("skeleton: variable '" + v.name +
                                        "' must be exactly one of discrete/continuous");
        if ((v.kind == VarKind::discrete) != disc)
            throw std::invalid_argument("skeleton: variable '" + v.name + "' kind/domain mismatch");
        std::set<std::string> uniq(v.discrete_domain.begin(), v.discrete_domain.end());
        if (uniq.size() != v.discrete_domain.size())
            throw std::invalid_argument("skeleton: duplicate symbols in domain of '" + v.name + "'");
    }

    // Wiring: every input is a constant or the output of an earlier operator.
    // Walking in order makes the operator list a DAG by construction.
    std::map<std::string, int> produced;  // identifier -> producing occurrence
    for (size_t i = 0; i < operators_.size(); ++i) {
        for (const std::string& in : operators_[i].inputs) {
            if (constants_.count(in)) continue;
            auto it = produced.find(in);
            if (it == produced.end())
                throw std::invalid_argument("skeleton: input '" + in + "' of operator '" +
                                            operators_[i].name +
                                            "' is neither a task constant nor an earlier output");
        }
        for (const std::string& out : operators_[i].outputs) {
            if (constants_.count(out) || produced.count(out))
                throw std::invalid_argument("skeleton: identifier '" + out + "' produced twice");
            produced[out] = static_cast<int>(i);
        }
    }

    var_producer_occ_.clear();
    for (const DecisionVar& v : decision_vars_) var_producer_occ_.push_back(produced.at(v.name));
}

int Skeleton::find_op(const std::string& name) const {
    for (size_t i = 0; i < operators_.size(); ++i)
        if (operators_[i].name == name) return static_cast<int>(i);
    return -1;
}

int Skeleton::var_index(const std::string& name) const {
    for (size_t i = 0; i < decision_vars_.size(); ++i)
        if (decision_vars_[i].name == name) return static_cast<int>(i);
    return -1;
}

int Skeleton::producer_of(const std::string& identifier) const {
    for (size_t i = 0; i < operators_.size(); ++i)
        for (const std::string& out : operators_[i].outputs)
            if (out == identifier) return static_cast<int>(i);
    return -1;
}

std::vector<int> Skeleton::chain_occurrences(int occurrence) const {
    std::vector<bool> seen(operators_.size(), false);
    std::vector<int> stack{occurrence};
    while (!stack.empty()) {
        const int occ = stack.back();
        stack.pop_back();
        for (const std::string& in : operators_[static_cast<size_t>(occ)].inputs) {
            const int p = producer_of(in);
            if (p >= 0 && !seen[static_cast<size_t>(p)]) {
                seen[static_cast<size_t>(p)] = true;
                stack.push_back(p);
            }
        }
    }
    std::vector<int> occs;
    for (size_t i = 0; i < seen.size(); ++i)
        if (seen[i]) occs.push_back(static_cast<int>(i));
    return occs;  // ascending = skeleton order
}

DependencyChain Skeleton::dependency_chain(int occurrence) const {
    if (occurrence < 0 || occurrence >= op_count())
        throw std::invalid_argument("dependency_chain: occurrence out of range");
    DependencyChain chain;
    for (int occ : chain_occurrences(occurrence)) {
        const Operator& op = operators_[static_cast<size_t>(occ)];
        for (const std::string& out : op.outputs) chain.producers.emplace_back(op.name, out);
    }
    chain.constants = chain_constants(occurrence);
    return chain;
}

DependencyChain Skeleton::dependency_chain(const std::string& op_name) const {
    const int occ = find_op(op_name);
    if (occ < 0) throw std::invalid_argument("dependency_chain: unknown operator '" + op_name + "'");
    return dependency_chain(occ);
}

std::vector<int> Skeleton::chain_decision_vars(int occurrence) const {
    std::vector<int> vars;
    for (int occ : chain_occurrences(occurrence)) {
        if (operators_[static_cast<size_t>(occ)].layer != Layer::decision) continue;
        const int vi = var_index(operators_[static_cast<size_t>(occ)].outputs[0]);
        if (vi >= 0) vars.push_back(vi);
    }
    std::sort(vars.begin(), vars.end());
    return vars;
}

std::vector<int> Skeleton::chain_connections(int occurrence) const {
    std::vector<int> conns;
    for (int occ : chain_occurrences(occurrence))
        if (operators_[static_cast<size_t>(occ)].layer == Layer::transition) conns.push_back(occ);
    return conns;
}

std::vector<std::string> Skeleton::chain_constants(int occurrence) const {
    std::set<std::string> consts;
    auto add_inputs = [&](int occ) {
        for (const std::string& in : operators_[static_cast<size_t>(occ)].inputs)
            if (constants_.count(in)) consts.insert(in);
    };
    add_inputs(occurrence);
    for (int occ : chain_occurrences(occurrence)) add_inputs(occ);
    return {consts.begin(), consts.end()};
}

}  // namespace cpbo
