#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "starfdr/common.hpp"
#include "starfdr/compression.hpp"

// In-process star network: node payloads go up to the center, broadcasts come
// back down, and every message is charged an exact fixed-width bit cost.

namespace starfdr::netsim {

struct StarTopology {
    std::size_t num_nodes = 0;
    std::vector<std::size_t> per_node_m;

    void validate() const {
        if (num_nodes == 0 || per_node_m.size() != num_nodes) {
            throw std::invalid_argument("StarTopology: node count mismatch");
        }
        for (std::size_t m : per_node_m) {
            if (m == 0) throw std::invalid_argument("StarTopology: per-node m must be >= 1");
        }
    }
};

enum class PayloadKind {
    signed_quantized_vector,
    sampled_counts,
    quantized_pvalue,
    sign_counts,
    raw_vector,  // uncompressed baseline transmission
};

inline std::string_view kind_name(PayloadKind kind) {
    switch (kind) {
        case PayloadKind::signed_quantized_vector: return "signed-quantized-vector";
        case PayloadKind::sampled_counts: return "sampled-counts";
        case PayloadKind::quantized_pvalue: return "quantized-pvalue";
        case PayloadKind::sign_counts: return "sign-counts";
        case PayloadKind::raw_vector: return "raw-vector";
    }
    return "unknown";
}

// Fixed-width uplink accounting. Count fields are sized to admit the value m,
// hence ceil(log2(m+1)) bits per count.
//   signed-quantized-vector: m * (ceil(log2 q) + 1)   (level + sign per statistic)
//   sampled-counts:          2 * L * ceil(log2(m+1))
//   quantized-pvalue:        ceil(log2(k+1))
//   sign-counts:             2 * ceil(log2(m+1))
//   raw-vector:              64 * m                    (one double per statistic)
inline std::uint64_t charge(PayloadKind kind, std::size_t m, unsigned q, unsigned L,
                            unsigned k) {
    switch (kind) {
        case PayloadKind::signed_quantized_vector:
            if (m == 0 || q == 0) {
                throw std::invalid_argument("charge: signed-quantized-vector needs m,q >= 1");
            }
            return static_cast<std::uint64_t>(m) * (ceil_log2(q) + 1);
        case PayloadKind::sampled_counts:
            if (m == 0 || L < 2) {
                throw std::invalid_argument("charge: sampled-counts needs m >= 1, L >= 2");
            }
            return 2ULL * L * ceil_log2(m + 1);
        case PayloadKind::quantized_pvalue:
            if (k == 0) throw std::invalid_argument("charge: quantized-pvalue needs k >= 1");
            return ceil_log2(static_cast<std::uint64_t>(k) + 1);
        case PayloadKind::sign_counts:
            if (m == 0) throw std::invalid_argument("charge: sign-counts needs m >= 1");
            return 2ULL * ceil_log2(m + 1);
        case PayloadKind::raw_vector:
            if (m == 0) throw std::invalid_argument("charge: raw-vector needs m >= 1");
            return 64ULL * m;
    }
    throw std::invalid_argument("charge: unknown payload kind");
}

struct SignedQuantizedBody {
    std::vector<double> signed_values;
    unsigned q = 0;
};
struct SampledCountsBody {
    compression::SampledCounts counts;
};
struct QuantizedPValueBody {
    double value = 1.0;
    unsigned k = 0;
    bool censored = false;  // 1-bit "above alpha" symbol instead of the value
};
struct SignCountsBody {
    std::uint64_t total = 0;
    std::uint64_t negative = 0;
};
struct RawVectorBody {
    std::vector<double> values;
};

struct NodePayload {
    PayloadKind kind;
    std::variant<SignedQuantizedBody, SampledCountsBody, QuantizedPValueBody,
                 SignCountsBody, RawVectorBody>
        body;
    std::uint64_t bit_cost = 0;
};

inline NodePayload make_signed_quantized(std::vector<double> signed_values, unsigned q) {
    const std::size_t m = signed_values.size();
    return {PayloadKind::signed_quantized_vector,
            SignedQuantizedBody{std::move(signed_values), q},
            charge(PayloadKind::signed_quantized_vector, m, q, 0, 0)};
}

inline NodePayload make_sampled_counts(compression::SampledCounts counts, std::size_t m) {
    const unsigned L = counts.L;
    return {PayloadKind::sampled_counts, SampledCountsBody{std::move(counts)},
            charge(PayloadKind::sampled_counts, m, 0, L, 0)};
}

inline NodePayload make_quantized_pvalue(double value, unsigned k, bool censored) {
    return {PayloadKind::quantized_pvalue, QuantizedPValueBody{value, k, censored},
            censored ? 1 : charge(PayloadKind::quantized_pvalue, 1, 0, 0, k)};
}

inline NodePayload make_sign_counts(std::uint64_t total, std::uint64_t negative) {
    return {PayloadKind::sign_counts, SignCountsBody{total, negative},
            charge(PayloadKind::sign_counts, total, 0, 0, 0)};
}

inline NodePayload make_raw_vector(std::vector<double> values) {
    const std::size_t m = values.size();
    return {PayloadKind::raw_vector, RawVectorBody{std::move(values)},
            charge(PayloadKind::raw_vector, m, 0, 0, 0)};
}

enum class BroadcastKind { threshold, threshold_index, rejected_index_set, global_decision };

inline std::string_view kind_name(BroadcastKind kind) {
    switch (kind) {
        case BroadcastKind::threshold: return "threshold";
        case BroadcastKind::threshold_index: return "threshold-index";
        case BroadcastKind::rejected_index_set: return "rejected-index-set";
        case BroadcastKind::global_decision: return "global-decision";
    }
    return "unknown";
}

// Downlink widths. A threshold on a q-level grid takes ceil(log2(q+1)) bits
// (q levels plus an "infinite" code); a raw threshold is one double. These are
// logged but never count toward the uplink budget comparisons.
inline std::uint64_t broadcast_bits(BroadcastKind kind, std::size_t m, unsigned q,
                                    unsigned L) {
    switch (kind) {
        case BroadcastKind::threshold:
            return q == 0 ? 64 : ceil_log2(static_cast<std::uint64_t>(q) + 1);
        case BroadcastKind::threshold_index:
            if (L < 2) throw std::invalid_argument("broadcast_bits: L must be >= 2");
            return std::max(1u, ceil_log2(L));
        case BroadcastKind::rejected_index_set:
            if (m == 0) throw std::invalid_argument("broadcast_bits: m must be >= 1");
            return m;  // membership bitmap
        case BroadcastKind::global_decision:
            return 1;
    }
    throw std::invalid_argument("broadcast_bits: unknown kind");
}

struct ThresholdBody {
    double value = kInfinity;
    unsigned q = 0;  // 0 = raw real
};
struct ThresholdIndexBody {
    unsigned index = 0;  // 1-based, in [1, L]
    unsigned L = 0;
};
struct RejectedSetBody {
    std::vector<std::size_t> indices;
    std::size_t m = 0;
};
struct GlobalDecisionBody {
    bool reject = false;
};

struct CenterBroadcast {
    BroadcastKind kind;
    std::variant<ThresholdBody, ThresholdIndexBody, RejectedSetBody, GlobalDecisionBody> body;
    std::uint64_t bit_cost = 0;
};

inline CenterBroadcast make_threshold(double value, unsigned q) {
    return {BroadcastKind::threshold, ThresholdBody{value, q},
            broadcast_bits(BroadcastKind::threshold, 0, q, 0)};
}

inline CenterBroadcast make_threshold_index(unsigned index, unsigned L) {
    if (index < 1 || index > L) {
        throw std::invalid_argument("make_threshold_index: index outside [1, L]");
    }
    return {BroadcastKind::threshold_index, ThresholdIndexBody{index, L},
            broadcast_bits(BroadcastKind::threshold_index, 0, 0, L)};
}

inline CenterBroadcast make_rejected_set(std::vector<std::size_t> indices, std::size_t m) {
    return {BroadcastKind::rejected_index_set, RejectedSetBody{std::move(indices), m},
            broadcast_bits(BroadcastKind::rejected_index_set, m, 0, 0)};
}

inline CenterBroadcast make_global_decision(bool reject) {
    return {BroadcastKind::global_decision, GlobalDecisionBody{reject},
            broadcast_bits(BroadcastKind::global_decision, 0, 0, 0)};
}

struct Message {
    std::string sender;
    std::string kind;
    std::uint64_t bits = 0;
};

struct Transcript {
    std::vector<std::uint64_t> uplink_bits_per_node;
    std::uint64_t downlink_bits = 0;
    std::vector<Message> messages;

    std::uint64_t total_uplink_bits() const {
        return std::accumulate(uplink_bits_per_node.begin(), uplink_bits_per_node.end(),
                               std::uint64_t{0});
    }
    std::uint64_t total_bits() const { return total_uplink_bits() + downlink_bits; }

    // Line-oriented log: "sender,kind,bits" per message.
    void write_log(std::ostream& os) const {
        for (const Message& msg : messages) {
            os << msg.sender << ',' << msg.kind << ',' << msg.bits << '\n';
        }
    }
};

// Message-accounting context for one protocol execution.
class Round {
public:
    explicit Round(std::size_t num_nodes) {
        transcript_.uplink_bits_per_node.assign(num_nodes, 0);
    }

    void uplink(std::size_t node, const NodePayload& payload) {
        transcript_.uplink_bits_per_node.at(node) += payload.bit_cost;
        transcript_.messages.push_back({"node" + std::to_string(node),
                                        std::string(kind_name(payload.kind)),
                                        payload.bit_cost});
    }

    void broadcast(const CenterBroadcast& b) {
        transcript_.downlink_bits += b.bit_cost;
        transcript_.messages.push_back(
            {"center", std::string(kind_name(b.kind)), b.bit_cost});
    }

    std::uint64_t total_bits() const { return transcript_.total_bits(); }
    const Transcript& transcript() const { return transcript_; }
    Transcript take_transcript() { return std::move(transcript_); }

private:
    Transcript transcript_;
};

}  // namespace starfdr::netsim
