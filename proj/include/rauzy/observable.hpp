#pragma once

/**
 * @file observable.hpp
 * @brief Real functions on the space of interval exchanges used by the
 * statistics engine.
 */

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rauzy/symbolic.hpp"

namespace rauzy {

struct ObservableSpec {
    enum class Kind { coordinate, log_min_gap, cylinder_indicator, user_table };

    Kind kind = Kind::coordinate;
    /// 0-based coordinate for Kind::coordinate.
    std::size_t index = 0;
    /// Cylinder word for Kind::cylinder_indicator.
    Word q;
    /// Value per permutation for Kind::user_table; missing permutations map to 0.
    std::map<Permutation, double> table;
    /// Hölder exponent used by holder_norm_estimate.
    double alpha = 1.0;

    static ObservableSpec coordinate(std::size_t i) {
        ObservableSpec s;
        s.index = i;
        return s;
    }
    static ObservableSpec log_min_gap() {
        ObservableSpec s;
        s.kind = Kind::log_min_gap;
        return s;
    }
    static ObservableSpec cylinder_indicator(Word w) {
        ObservableSpec s;
        s.kind = Kind::cylinder_indicator;
        s.q = std::move(w);
        return s;
    }
    static ObservableSpec user_table(std::map<Permutation, double> t) {
        ObservableSpec s;
        s.kind = Kind::user_table;
        s.table = std::move(t);
        return s;
    }

    /// Evaluates at (lambda, pi) with |lambda| = 1.
    [[nodiscard]] double operator()(const std::vector<double>& lambda, const Permutation& pi) const {
        switch (kind) {
            case Kind::coordinate:
                if (index >= lambda.size()) throw ValidationError("observable coordinate out of range");
                return lambda[index];
            case Kind::log_min_gap:
                // log of the shortest subinterval
                return std::log(*std::min_element(lambda.begin(), lambda.end()));
            case Kind::cylinder_indicator:
                return cylinder_contains(q, FloatPoint(FloatPoint::trusted_t{}, lambda, pi)) ? 1.0 : 0.0;
            case Kind::user_table: {
                auto it = table.find(pi);
                return it == table.end() ? 0.0 : it->second;
            }
        }
        return 0.0;
    }

    [[nodiscard]] double operator()(const FloatPoint& x) const { return (*this)(x.lengths(), x.pi()); }

    [[nodiscard]] std::string name() const {
        switch (kind) {
            case Kind::coordinate: return "lambda_" + std::to_string(index + 1);
            case Kind::log_min_gap: return "log_min_gap";
            case Kind::cylinder_indicator: return "cylinder[" + to_string(q) + "]";
            case Kind::user_table: return "user_table";
        }
        return "";
    }
};

/// Parses `lambda_i` / `coordinate:i` (1-based), `log_min_gap`, and `cylinder`
/// (which uses the supplied word).
[[nodiscard]] inline ObservableSpec parse_observable(const std::string& text, const Word& q = {}) {
    auto index_after = [&](std::size_t pos) {
        try {
            std::size_t used = 0;
            const long i = std::stol(text.substr(pos), &used);
            if (used != text.size() - pos || i < 1) throw ValidationError("");
            return static_cast<std::size_t>(i - 1);
        } catch (const std::exception&) {
            throw ValidationError("bad observable coordinate in '" + text + "'");
        }
    };
    if (text.rfind("lambda_", 0) == 0) return ObservableSpec::coordinate(index_after(7));
    if (text.rfind("coordinate:", 0) == 0) return ObservableSpec::coordinate(index_after(11));
    if (text == "log_min_gap") return ObservableSpec::log_min_gap();
    if (text == "cylinder") {
        if (q.empty()) throw ValidationError("the cylinder observable needs a word");
        return ObservableSpec::cylinder_indicator(q);
    }
    throw ValidationError("unknown observable '" + text + "'");
}

}  // namespace rauzy
