#pragma once

/**
 * @file rauzy_class.hpp
 * @brief The Rauzy class of an irreducible permutation as a labelled graph.
 *
 * Nodes are discovered breadth-first from the seed; each BFS layer is sorted
 * shortlex before it is appended, so node indices are reproducible.
 */

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rauzy/permutation.hpp"

namespace rauzy {

class RauzyClassGraph {
public:
    struct Edge {
        std::size_t src;
        Op op;
        std::size_t dst;
    };

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] int m() const noexcept { return nodes_.empty() ? 0 : nodes_.front().m(); }
    [[nodiscard]] const std::vector<Permutation>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const Permutation& node(std::size_t i) const { return nodes_.at(i); }

    [[nodiscard]] std::optional<std::size_t> index_of(const Permutation& pi) const {
        auto it = index_.find(pi);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    [[nodiscard]] bool contains(const Permutation& pi) const { return index_.count(pi) != 0; }

    [[nodiscard]] std::size_t successor(std::size_t i, Op op) const {
        return next_.at(i)[static_cast<std::size_t>(op)];
    }

    /// Edges in node order, a before b.
    [[nodiscard]] std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(2 * size());
        for (std::size_t i = 0; i < size(); ++i)
            for (Op op : {Op::a, Op::b}) out.push_back({i, op, successor(i, op)});
        return out;
    }

    friend RauzyClassGraph rauzy_class(const Permutation& seed);

private:
    std::vector<Permutation> nodes_;
    std::map<Permutation, std::size_t> index_;
    std::vector<std::array<std::size_t, 2>> next_;
};

[[nodiscard]] inline RauzyClassGraph rauzy_class(const Permutation& seed) {
    require_irreducible(seed);
    RauzyClassGraph g;
    auto add = [&g](const Permutation& p) {
        g.index_.emplace(p, g.nodes_.size());
        g.nodes_.push_back(p);
    };
    add(seed);
    std::size_t layer_begin = 0;
    while (layer_begin < g.nodes_.size()) {
        const std::size_t layer_end = g.nodes_.size();
        std::vector<Permutation> fresh;
        for (std::size_t i = layer_begin; i < layer_end; ++i) {
            for (Op op : {Op::a, Op::b}) {
                Permutation q = apply(op, g.nodes_[i]);
                if (!g.contains(q) && std::find(fresh.begin(), fresh.end(), q) == fresh.end())
                    fresh.push_back(std::move(q));
            }
        }
        std::sort(fresh.begin(), fresh.end());
        for (const auto& q : fresh) add(q);
        layer_begin = layer_end;
    }
    g.next_.resize(g.nodes_.size());
    for (std::size_t i = 0; i < g.nodes_.size(); ++i)
        for (Op op : {Op::a, Op::b})
            g.next_[i][static_cast<std::size_t>(op)] = g.index_.at(apply(op, g.nodes_[i]));
    return g;
}

/// Edge list CSV: `src,op,dst`.
inline void write_edges_csv(std::ostream& os, const RauzyClassGraph& g) {
    os << "src,op,dst\n";
    for (const auto& e : g.edges())
        os << to_string(g.node(e.src)) << ',' << op_char(e.op) << ',' << to_string(g.node(e.dst)) << '\n';
}

}  // namespace rauzy
