#pragma once

/**
 * @file kernel.hpp
 * @brief Allocation-free float Zorich steps on Rauzy class node indices.
 *
 * The arithmetic is the same routine the generic induction uses, so a kernel
 * orbit is bit-identical to the orbit of zorich_step on FloatPoint.
 */

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rauzy/induction.hpp"
#include "rauzy/rauzy_class.hpp"

namespace rauzy {

/// A Zorich letter with its starting permutation given as a class node index.
struct NodeLetter {
    Op op = Op::a;
    std::uint64_t count = 0;
    std::size_t start = 0;
    double flow_time = 0.0;

    bool same_letter(const NodeLetter& o) const noexcept { return op == o.op && count == o.count && start == o.start; }
};

class ClassDynamics {
public:
    explicit ClassDynamics(RauzyClassGraph graph) : graph_(std::move(graph)) {
        for (const auto& p : graph_.nodes()) k_.push_back(static_cast<std::size_t>(p.last_bottom()));
        for (std::size_t i = 0; i < graph_.size(); ++i)
            next_.push_back({graph_.successor(i, Op::a), graph_.successor(i, Op::b)});
    }

    [[nodiscard]] const RauzyClassGraph& graph() const noexcept { return graph_; }
    [[nodiscard]] std::size_t m() const noexcept { return static_cast<std::size_t>(graph_.m()); }
    /// pi^{-1}(m), 1-based, of node i.
    [[nodiscard]] std::size_t k(std::size_t i) const noexcept { return k_[i]; }
    [[nodiscard]] std::size_t next(std::size_t i, Op op) const noexcept { return next_[i][static_cast<std::size_t>(op)]; }

    [[nodiscard]] std::size_t node_of(const Permutation& pi) const {
        const auto i = graph_.index_of(pi);
        if (!i) throw ValidationError("permutation " + to_string(pi) + " is not in the Rauzy class");
        return *i;
    }

    [[nodiscard]] NodeLetter to_node_letter(const Letter& l, double flow_time = 0.0) const {
        return {l.c, l.n, node_of(l.pi), flow_time};
    }

    [[nodiscard]] PointType classify(const std::vector<double>& lambda, std::size_t node) const noexcept {
        const double p = lambda[k_[node] - 1], q = lambda.back();
        if (p > q) return PointType::plus;
        if (q > p) return PointType::minus;
        return PointType::boundary;
    }

    /// One Zorich step in place.  Throws NonGeneric / CapExceeded like zorich_step.
    NodeLetter zorich(std::vector<double>& lambda, std::size_t& node, std::uint64_t cap = default_cap) const {
        const PointType type0 = classify(lambda, node);
        if (type0 == PointType::boundary) throw NonGeneric("point lies on the boundary lambda_m = lambda_{pi^-1 m}");
        NodeLetter out{detail::branch_for(type0), 0, node, 0.0};
        for (;;) {
            if (out.count == cap) throw CapExceeded("Zorich run exceeded the cap of " + std::to_string(cap) + " steps");
            out.flow_time += detail::rauzy_update(out.op, k_[node], lambda);
            node = next(node, out.op);
            ++out.count;
            const PointType t = classify(lambda, node);
            if (t == PointType::boundary) throw NonGeneric("Rauzy-Veech step landed on the boundary");
            if (t != type0) return out;
        }
    }

private:
    RauzyClassGraph graph_;
    std::vector<std::size_t> k_;
    std::vector<std::array<std::size_t, 2>> next_;
};

}  // namespace rauzy
