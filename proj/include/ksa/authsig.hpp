#pragma once

#include <algorithm>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ksa/core.hpp"

namespace ksa {

class SigningCapability;

/// A relayed message m:p0:p1:...:pi. Chains are immutable; the only way to obtain
/// one carrying a real signature is through a SigningCapability.
class SignedChain {
public:
    const Value& payload() const { return payload_; }
    const std::vector<ProcessId>& signers() const { return signers_; }
    ProcessId origin() const { return signers_.front(); }
    ProcessId last_signer() const { return signers_.back(); }
    std::size_t length() const { return signers_.size(); }

    bool signed_by(ProcessId p) const {
        return std::find(signers_.begin(), signers_.end(), p) != signers_.end();
    }

    /// Wire-level chain with no signature behind it. Exists only to model forgery
    /// attempts; a SignatureLog never vouches for it.
    static SignedChain unattested(Value payload, std::vector<ProcessId> signers) {
        if (signers.empty()) throw std::invalid_argument("chain needs at least one signer");
        return SignedChain(payload, std::move(signers));
    }

    friend auto operator<=>(const SignedChain&, const SignedChain&) = default;

private:
    friend class SigningCapability;

    SignedChain(Value payload, std::vector<ProcessId> signers)
        : payload_(payload), signers_(std::move(signers)) {}

    Value payload_;
    std::vector<ProcessId> signers_;
};

/// Per-run registry of every signature produced. Signature verification is a
/// lookup: a chain is authentic iff each of its prefixes was signed by the
/// prefix's last signer.
class SignatureLog {
public:
    /// Mints the unique capability of `owner` for this run.
    SigningCapability mint(ProcessId owner);

    bool vouches_for(const SignedChain& c) const {
        std::vector<ProcessId> prefix;
        prefix.reserve(c.length());
        for (ProcessId p : c.signers()) {
            prefix.push_back(p);
            if (!signed_.contains({c.payload(), prefix})) return false;
        }
        return true;
    }

    /// Payloads that `p` signed as the origin of a chain.
    std::vector<Value> originated_by(ProcessId p) const {
        std::vector<Value> out;
        for (const auto& [payload, signers] : signed_)
            if (signers.size() == 1 && signers.front() == p) out.push_back(payload);
        return out;
    }

private:
    friend class SigningCapability;

    void record(const SignedChain& c) { signed_.emplace(c.payload(), c.signers()); }

    std::set<ProcessId> minted_;
    std::set<std::pair<Value, std::vector<ProcessId>>> signed_;
};

/// The only handle through which `owner`'s id can be appended to a chain.
/// Move-only: one capability per process per run.
class SigningCapability {
public:
    SigningCapability(const SigningCapability&) = delete;
    SigningCapability& operator=(const SigningCapability&) = delete;
    SigningCapability(SigningCapability&&) noexcept = default;
    SigningCapability& operator=(SigningCapability&&) noexcept = default;

    /// Standalone capability with no run log (unit tests, single-process use).
    static SigningCapability detached(ProcessId owner) { return SigningCapability(owner, nullptr); }

    ProcessId owner() const { return owner_; }

    SignedChain sign(Value v) const {
        if (!v.is_domain()) throw std::invalid_argument("only domain values can be signed");
        SignedChain c(v, {owner_});
        if (log_) log_->record(c);
        return c;
    }

    /// Appends the owner's signature. Duplicate signers are representable;
    /// receivers reject them.
    SignedChain extend(const SignedChain& c) const {
        auto signers = c.signers();
        signers.push_back(owner_);
        SignedChain out(c.payload(), std::move(signers));
        if (log_) log_->record(out);
        return out;
    }

private:
    friend class SignatureLog;

    SigningCapability(ProcessId owner, SignatureLog* log) : owner_(owner), log_(log) {}

    ProcessId owner_;
    SignatureLog* log_;
};

inline SigningCapability SignatureLog::mint(ProcessId owner) {
    if (!minted_.insert(owner).second) throw std::logic_error("capability already minted for this process");
    return SigningCapability(owner, this);
}

/// Receive-side validity of a chain for the TRB instance of `designated_sender`:
/// distinct signers, originated by the sender, and at least one signature per
/// elapsed round.
inline bool is_valid(const SignedChain& c, ProcessId designated_sender, std::size_t receive_round) {
    if (receive_round < 1) throw std::invalid_argument("receive_round >= 1 required");
    const auto& s = c.signers();
    if (s.front() != designated_sender) return false;
    if (s.size() < receive_round) return false;
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

}  // namespace ksa
