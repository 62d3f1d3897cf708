#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ksa/authsig.hpp"
#include "ksa/core.hpp"
#include "ksa/sync_engine.hpp"

namespace ksa {

/// n x n matrix held by one process: row i is the vector p_i reported in round 2,
/// cell (i, j) is p_j's round-1 value as reported by p_i.
class DecisionMatrix {
public:
    explicit DecisionMatrix(std::size_t n) : n_(n), cells_(n * n, Value::bottom()) {}

    std::size_t size() const { return n_; }
    Value& at(std::size_t row, std::size_t col) { return cells_.at(row * n_ + col); }
    const Value& at(std::size_t row, std::size_t col) const { return cells_.at(row * n_ + col); }

    ViewVector row(std::size_t i) const {
        return ViewVector(cells_.begin() + static_cast<std::ptrdiff_t>(i * n_),
                          cells_.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_));
    }

private:
    std::size_t n_;
    std::vector<Value> cells_;
};

/// Column-consistency filter run at the end of round 2. A column keeps this
/// process's own reading unless another row reports a different non-Bottom value.
inline ViewVector filter_columns(const DecisionMatrix& m, ProcessId me) {
    const std::size_t n = m.size();
    ViewVector v(n, Value::bottom());
    for (std::size_t j = 0; j < n; ++j) {
        if (j == me.index) {
            v[j] = m.at(me.index, me.index);
            continue;
        }
        const Value w = m.at(me.index, j);
        if (w.is_bottom()) continue;
        v[j] = w;
        for (std::size_t l = 0; l < n; ++l) {
            if (l == me.index) continue;
            const Value& other = m.at(l, j);
            if (!other.is_bottom() && other != w) v[j] = Value::bottom();
        }
    }
    return v;
}

/// Own value if it fills at least n - t slots, Bottom otherwise.
inline Value decide_two_round(std::span<const Value> v, Value own, std::size_t n, std::size_t t) {
    const auto count = static_cast<std::size_t>(std::count(v.begin(), v.end(), own));
    return count >= n - t ? own : Value::bottom();
}

/// Two-round authenticated k-set agreement, k = floor(n / (n - t)) + 1.
struct TwoRoundKsa {
    class Process {
    public:
        Process(ProcessId me, const SystemConfig& cfg, Value initial, const SigningCapability& cap)
            : me_(me), cfg_(cfg), own_(initial), matrix_(cfg.n), row_chains_(cfg.n) {
            matrix_.at(me.index, me.index) = initial;
            row_chains_[me.index] = cap.sign(initial);
        }

        std::vector<RoundMessage> emit(std::size_t round) const {
            std::vector<RoundMessage> out;
            if (round == 1) {
                for (std::size_t j = 0; j < cfg_.n; ++j)
                    out.push_back({me_, ProcessId{j}, round, 0, Chains{{*row_chains_[me_.index]}}});
            } else if (round == 2) {
                for (std::size_t j = 0; j < cfg_.n; ++j)
                    out.push_back({me_, ProcessId{j}, round, 0, VectorMsg{row_chains_}});
            }
            return out;
        }

        void absorb(std::size_t round, std::span<const RoundMessage> inbox) {
            if (round == 1) {
                for (const auto& m : inbox) round1_absorb(m);
            } else if (round == 2) {
                for (const auto& m : inbox) round2_absorb(m);
                view_ = filter_columns(matrix_, me_);
                decision_ = decide_two_round(*view_, own_, cfg_.n, cfg_.t);
            }
        }

        /// Stores p_j's signed round-1 value in this process's own row.
        void round1_absorb(const RoundMessage& m) {
            const auto* c = std::get_if<Chains>(&m.body);
            if (!c || c->chains.size() != 1 || m.from == me_) return;
            const auto& chain = c->chains.front();
            if (!is_own_value_of(chain, m.from)) return;
            matrix_.at(me_.index, m.from.index) = chain.payload();
            row_chains_[m.from.index] = chain;
        }

        /// Stores the row reported by p_j; malformed vectors count as not received.
        void round2_absorb(const RoundMessage& m) {
            const auto* vec = std::get_if<VectorMsg>(&m.body);
            if (!vec || vec->slots.size() != cfg_.n || m.from == me_) return;
            for (std::size_t k = 0; k < cfg_.n; ++k) {
                const auto& slot = vec->slots[k];
                matrix_.at(m.from.index, k) =
                    slot && is_own_value_of(*slot, ProcessId{k}) ? slot->payload() : Value::bottom();
            }
        }

        std::optional<Value> decision() const { return decision_; }
        ViewVector view() const { return view_.value_or(ViewVector{}); }
        std::vector<Delivery> deliveries() const { return {}; }
        const DecisionMatrix& matrix() const { return matrix_; }

    private:
        static bool is_own_value_of(const SignedChain& c, ProcessId p) {
            return c.length() == 1 && c.origin() == p && c.payload().is_domain();
        }

        ProcessId me_;
        SystemConfig cfg_;
        Value own_;
        DecisionMatrix matrix_;
        std::vector<std::optional<SignedChain>> row_chains_;
        std::optional<ViewVector> view_;
        std::optional<Value> decision_;
    };

    Process make(ProcessId me, const SystemConfig& cfg, Value initial, const SigningCapability& cap) const {
        return Process(me, cfg, initial, cap);
    }
};

}  // namespace ksa
