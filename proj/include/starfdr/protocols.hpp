#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "starfdr/common.hpp"
#include "starfdr/compression.hpp"
#include "starfdr/netsim.hpp"
#include "starfdr/stats.hpp"

// Node/center choreography for the three decision settings over a star
// network. Every protocol is a deterministic function of its inputs; the
// returned Decision carries the exact bit total, and an optional Transcript
// out-parameter receives the full message log.

namespace starfdr::protocols {

using IndexSet = std::vector<std::size_t>;

struct Decision {
    // Exactly one of the first two is populated, depending on the setting.
    std::optional<std::vector<IndexSet>> per_node_rejections;
    std::optional<bool> global_reject;
    std::uint64_t total_bits = 0;

    // Diagnostics for inspection tools; not part of the decision itself.
    std::optional<double> threshold;
    std::optional<unsigned> threshold_index;
    std::optional<double> global_pvalue;
};

namespace detail {

inline void validate_nodes(const std::vector<StatVector>& nodes, const char* where) {
    if (nodes.empty()) {
        throw std::invalid_argument(std::string(where) + ": need at least one node");
    }
    for (const StatVector& sv : nodes) validate_stat_vector(sv, where);
}

inline void validate_alpha(double alpha, const char* where) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument(std::string(where) + ": alpha must lie in (0,1)");
    }
}

inline void validate_equal_lengths(const std::vector<StatVector>& nodes, const char* where) {
    for (const StatVector& sv : nodes) {
        if (sv.size() != nodes.front().size()) {
            throw std::invalid_argument(std::string(where) +
                                        ": nodes must share the same length");
        }
    }
}

inline void finish(netsim::Round& round, Decision& decision, netsim::Transcript* out) {
    decision.total_bits = round.total_bits();
    if (out != nullptr) *out = round.take_transcript();
}

// Quantized uplink shared by the Algorithm-1-style protocols: every node
// normalizes, quantizes, and transmits sign * level.
inline std::vector<std::vector<double>> quantized_uplink(
    const std::vector<StatVector>& nodes, unsigned q,
    const compression::MagnitudeQuantizer& quantizer, netsim::Round& round) {
    std::vector<std::vector<double>> sent;
    sent.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto qv = compression::quantize_signed(nodes[i].values, q, quantizer);
        netsim::NodePayload payload = netsim::make_signed_quantized(qv.signed_values(), q);
        round.uplink(i, payload);
        sent.push_back(std::get<netsim::SignedQuantizedBody>(payload.body).signed_values);
    }
    return sent;
}

// Sampled-counts uplink of Algorithm 2; returns the node-side normalized
// vectors (kept locally for the final rejection step) and the pooled counts.
struct SampledUplink {
    std::vector<compression::NormalizedStatVector> normalized;
    std::vector<std::uint64_t> pooled_v;
    std::vector<std::uint64_t> pooled_r;
};

inline SampledUplink sampled_uplink(const std::vector<StatVector>& nodes, unsigned L,
                                    netsim::Round& round) {
    SampledUplink up;
    up.pooled_v.assign(L, 0);
    up.pooled_r.assign(L, 0);
    up.normalized.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        compression::NormalizedStatVector norm = compression::normalize(nodes[i].values);
        compression::SampledCounts counts = compression::sample_vr(norm, L);
        round.uplink(i, netsim::make_sampled_counts(counts, nodes[i].size()));
        for (unsigned l = 0; l < L; ++l) {
            up.pooled_v[l] += counts.v_hat[l];
            up.pooled_r[l] += counts.r[l];
        }
        up.normalized.push_back(std::move(norm));
    }
    return up;
}

inline std::vector<double> pooled_fdp_hat(const SampledUplink& up) {
    std::vector<double> fdp(up.pooled_v.size());
    for (std::size_t l = 0; l < fdp.size(); ++l) {
        fdp[l] = (1.0 + static_cast<double>(up.pooled_v[l])) /
                 std::max(static_cast<double>(up.pooled_r[l]), 1.0);
    }
    return fdp;
}

// Quantize-and-combine pipeline shared by the Simes-based global tests.
template <typename LocalPValue>
Decision simes_protocol(const std::vector<StatVector>& nodes, double alpha,
                        const std::vector<unsigned>& k_levels, bool censor,
                        netsim::Transcript* transcript, const char* where,
                        LocalPValue&& local_pvalue) {
    validate_nodes(nodes, where);
    validate_alpha(alpha, where);
    if (k_levels.size() != nodes.size()) {
        throw std::invalid_argument(std::string(where) +
                                    ": one quantization level count per node required");
    }
    for (unsigned k : k_levels) {
        if (k == 0) throw std::invalid_argument(std::string(where) + ": k must be >= 1");
    }
    netsim::Round round(nodes.size());
    std::vector<double> received;
    received.reserve(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double p = local_pvalue(nodes[i]);
        const double quantized = stats::quantize_pvalue(p, k_levels[i]);
        const bool censored = censor && quantized > alpha;
        round.uplink(i, netsim::make_quantized_pvalue(censored ? 1.0 : quantized,
                                                      k_levels[i], censored));
        received.push_back(censored ? 1.0 : quantized);
    }
    const double simes = stats::simes_pvalue(received);
    const bool reject = simes <= alpha;
    round.broadcast(netsim::make_global_decision(reject));
    Decision decision;
    decision.global_reject = reject;
    decision.global_pvalue = simes;
    finish(round, decision, transcript);
    return decision;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Setting I: individual decisions under global FDR control
// ---------------------------------------------------------------------------

// Pooled q-BC: quantized statistics are pooled at the center, which runs the
// BC procedure and broadcasts the threshold. Rejections compare the
// transmitted values against the broadcast threshold, which keeps node
// decisions on the same scale the center selected on.
inline Decision pooled_qbc(const std::vector<StatVector>& nodes, double alpha, unsigned q,
                           const compression::MagnitudeQuantizer& quantizer,
                           netsim::Transcript* transcript = nullptr) {
    detail::validate_nodes(nodes, "pooled_qbc");
    detail::validate_alpha(alpha, "pooled_qbc");
    netsim::Round round(nodes.size());
    const auto sent = detail::quantized_uplink(nodes, q, quantizer, round);

    std::vector<double> pooled;
    for (const auto& values : sent) pooled.insert(pooled.end(), values.begin(), values.end());
    const stats::SelectionResult sel = stats::bc_select(pooled, alpha);
    round.broadcast(netsim::make_threshold(sel.threshold, q));

    std::vector<IndexSet> rejections(nodes.size());
    if (std::isfinite(sel.threshold)) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::size_t j = 0; j < sent[i].size(); ++j) {
                if (sent[i][j] >= sel.threshold) rejections[i].push_back(j);
            }
        }
    }
    Decision decision;
    decision.per_node_rejections = std::move(rejections);
    decision.threshold = sel.threshold;
    detail::finish(round, decision, transcript);
    return decision;
}

inline Decision pooled_qbc(const std::vector<StatVector>& nodes, double alpha, unsigned q,
                           netsim::Transcript* transcript = nullptr) {
    return pooled_qbc(nodes, alpha, q, compression::MagnitudeQuantizer{}, transcript);
}

// Sampled BC: nodes transmit sampled (V-hat, R) counts; the center picks the
// smallest grid index whose pooled FDP estimate clears alpha (L when none
// does) and broadcasts it. Node rejections use the strict inequality
// N_j > t_K on the locally kept normalized statistics.
inline Decision sampled_bc(const std::vector<StatVector>& nodes, double alpha, unsigned L,
                           netsim::Transcript* transcript = nullptr) {
    detail::validate_nodes(nodes, "sampled_bc");
    detail::validate_alpha(alpha, "sampled_bc");
    if (L < 2) throw std::invalid_argument("sampled_bc: L must be >= 2");
    netsim::Round round(nodes.size());
    const detail::SampledUplink up = detail::sampled_uplink(nodes, L, round);
    const std::vector<double> fdp = detail::pooled_fdp_hat(up);

    unsigned k_index = L;  // min of the empty set
    for (unsigned l = 1; l <= L; ++l) {
        if (fdp[l - 1] <= alpha) {
            k_index = l;
            break;
        }
    }
    round.broadcast(netsim::make_threshold_index(k_index, L));

    const double t = compression::SampledCounts::grid_point(k_index, L);
    std::vector<IndexSet> rejections(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto& norm = up.normalized[i].values;
        for (std::size_t j = 0; j < norm.size(); ++j) {
            if (norm[j] > t) rejections[i].push_back(j);
        }
    }
    Decision decision;
    decision.per_node_rejections = std::move(rejections);
    decision.threshold = t;
    decision.threshold_index = k_index;
    detail::finish(round, decision, transcript);
    return decision;
}

// Centralized BC on the raw statistics: the unlimited-budget reference.
inline Decision pooled_bc_baseline(const std::vector<StatVector>& nodes, double alpha,
                                   netsim::Transcript* transcript = nullptr) {
    detail::validate_nodes(nodes, "pooled_bc_baseline");
    detail::validate_alpha(alpha, "pooled_bc_baseline");
    netsim::Round round(nodes.size());
    std::vector<double> pooled;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        round.uplink(i, netsim::make_raw_vector(nodes[i].values));
        pooled.insert(pooled.end(), nodes[i].values.begin(), nodes[i].values.end());
    }
    const stats::SelectionResult sel = stats::bc_select(pooled, alpha);
    round.broadcast(netsim::make_threshold(sel.threshold, 0));

    std::vector<IndexSet> rejections(nodes.size());
    if (std::isfinite(sel.threshold)) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            for (std::size_t j = 0; j < nodes[i].size(); ++j) {
                if (nodes[i].values[j] >= sel.threshold) rejections[i].push_back(j);
            }
        }
    }
    Decision decision;
    decision.per_node_rejections = std::move(rejections);
    decision.threshold = sel.threshold;
    detail::finish(round, decision, transcript);
    return decision;
}

// ---------------------------------------------------------------------------
// Setting II: one global decision for the intersection of all hypotheses
// ---------------------------------------------------------------------------

// Reject the global null iff the pooled q-BC threshold is finite, i.e. iff the
// FDR-controlling procedure rejects anything.
inline Decision global_pooled_qbc(const std::vector<StatVector>& nodes, double alpha,
                                  unsigned q, netsim::Transcript* transcript = nullptr) {
    detail::validate_nodes(nodes, "global_pooled_qbc");
    detail::validate_alpha(alpha, "global_pooled_qbc");
    netsim::Round round(nodes.size());
    const auto sent = detail::quantized_uplink(
        nodes, q, compression::MagnitudeQuantizer{}, round);
    std::vector<double> pooled;
    for (const auto& values : sent) pooled.insert(pooled.end(), values.begin(), values.end());
    const stats::SelectionResult sel = stats::bc_select(pooled, alpha);
    const bool reject = std::isfinite(sel.threshold);
    round.broadcast(netsim::make_global_decision(reject));
    Decision decision;
    decision.global_reject = reject;
    decision.threshold = sel.threshold;
    detail::finish(round, decision, transcript);
    return decision;
}

// Wilcoxon signed-rank test on the pooled quantized statistics; asymptotically
// valid under the global null. An all-zero pool carries no sign information,
// so it counts as p = 1.
inline Decision global_wilcoxon(const std::vector<StatVector>& nodes, double alpha,
                                unsigned q, netsim::Transcript* transcript = nullptr) {
    detail::validate_nodes(nodes, "global_wilcoxon");
    detail::validate_alpha(alpha, "global_wilcoxon");
    netsim::Round round(nodes.size());
    const auto sent = detail::quantized_uplink(
        nodes, q, compression::MagnitudeQuantizer{}, round);
    std::vector<double> pooled;
    for (const auto& values : sent) pooled.insert(pooled.end(), values.begin(), values.end());
    double p = 1.0;
    const bool all_zero =
        std::all_of(pooled.begin(), pooled.end(), [](double v) { return v == 0.0; });
    if (!all_zero) {
        const stats::WilcoxonStatistic ws = stats::wilcoxon_statistic(pooled);
        p = stats::wilcoxon_pvalue(ws.w, ws.n_eff);
    }
    const bool reject = p <= alpha;
    round.broadcast(netsim::make_global_decision(reject));
    Decision decision;
    decision.global_reject = reject;
    decision.global_pvalue = p;
    detail::finish(round, decision, transcript);
    return decision;
}

// Each node sends (count, negative count); the center runs one exact sign test
// on the totals.
inline Decision global_sign_test(const std::vector<StatVector>& nodes, double alpha,
                                 netsim::Transcript* transcript = nullptr) {
    detail::validate_nodes(nodes, "global_sign_test");
    detail::validate_alpha(alpha, "global_sign_test");
    netsim::Round round(nodes.size());
    std::uint64_t total = 0, negative = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::uint64_t neg = 0;
        for (double v : nodes[i].values) {
            if (v < 0.0) ++neg;
        }
        round.uplink(i, netsim::make_sign_counts(nodes[i].size(), neg));
        total += nodes[i].size();
        negative += neg;
    }
    const double p = stats::sign_test_pvalue(negative, total);
    const bool reject = p <= alpha;
    round.broadcast(netsim::make_global_decision(reject));
    Decision decision;
    decision.global_reject = reject;
    decision.global_pvalue = p;
    detail::finish(round, decision, transcript);
    return decision;
}

// Reject the global null iff the pooled FDP estimate dips below alpha anywhere
// on the sampling grid.
inline Decision global_sampled_bc(const std::vector<StatVector>& nodes, double alpha,
                                  unsigned L, netsim::Transcript* transcript = nullptr) {
    detail::validate_nodes(nodes, "global_sampled_bc");
    detail::validate_alpha(alpha, "global_sampled_bc");
    if (L < 2) throw std::invalid_argument("global_sampled_bc: L must be >= 2");
    netsim::Round round(nodes.size());
    const detail::SampledUplink up = detail::sampled_uplink(nodes, L, round);
    const std::vector<double> fdp = detail::pooled_fdp_hat(up);
    const bool reject = *std::min_element(fdp.begin(), fdp.end()) <= alpha;
    round.broadcast(netsim::make_global_decision(reject));
    Decision decision;
    decision.global_reject = reject;
    detail::finish(round, decision, transcript);
    return decision;
}

// Local Wilcoxon p-values, grid-quantized, combined with Simes at the center.
// With `censor` set, a node whose quantized p-value exceeds alpha sends a
// single "above" bit instead and the center treats it as 1; the rejection
// decision is unchanged because such terms can never push the Simes minimum
// below alpha.
inline Decision wilcoxon_simes(const std::vector<StatVector>& nodes, double alpha,
                               const std::vector<unsigned>& k_levels, bool censor = false,
                               netsim::Transcript* transcript = nullptr) {
    return detail::simes_protocol(
        nodes, alpha, k_levels, censor, transcript, "wilcoxon_simes",
        [](const StatVector& sv) {
            const bool all_zero = std::all_of(sv.values.begin(), sv.values.end(),
                                              [](double v) { return v == 0.0; });
            if (all_zero) return 1.0;
            const stats::WilcoxonStatistic ws = stats::wilcoxon_statistic(sv.values);
            return stats::wilcoxon_pvalue(ws.w, ws.n_eff);
        });
}

// Same pipeline with the exact sign test as the local test; valid at any
// sample size.
inline Decision sign_simes(const std::vector<StatVector>& nodes, double alpha,
                           const std::vector<unsigned>& k_levels, bool censor = false,
                           netsim::Transcript* transcript = nullptr) {
    return detail::simes_protocol(
        nodes, alpha, k_levels, censor, transcript, "sign_simes",
        [](const StatVector& sv) {
            std::uint64_t neg = 0;
            for (double v : sv.values) {
                if (v < 0.0) ++neg;
            }
            return stats::sign_test_pvalue(neg, sv.size());
        });
}

// ---------------------------------------------------------------------------
// Setting III: per-variable intersection hypotheses across aligned nodes
// ---------------------------------------------------------------------------

// Averaged BC: quantized transmission as in the pooled protocol, but the
// center averages the signed quantized statistics coordinate-wise, runs BC on
// the average, and broadcasts the rejected variable set. Every node ends up
// with the same rejections.
inline Decision averaged_bc(const std::vector<StatVector>& nodes, double alpha, unsigned q,
                            const compression::MagnitudeQuantizer& quantizer,
                            netsim::Transcript* transcript = nullptr) {
    detail::validate_nodes(nodes, "averaged_bc");
    detail::validate_alpha(alpha, "averaged_bc");
    detail::validate_equal_lengths(nodes, "averaged_bc");
    netsim::Round round(nodes.size());
    const auto sent = detail::quantized_uplink(nodes, q, quantizer, round);

    const std::size_t m = nodes.front().size();
    std::vector<double> averaged(m, 0.0);
    for (const auto& values : sent) {
        for (std::size_t j = 0; j < m; ++j) averaged[j] += values[j];
    }
    for (double& v : averaged) v /= static_cast<double>(nodes.size());

    const stats::SelectionResult sel = stats::bc_select(averaged, alpha);
    round.broadcast(netsim::make_rejected_set(sel.rejected, m));
    Decision decision;
    decision.per_node_rejections =
        std::vector<IndexSet>(nodes.size(), sel.rejected);
    decision.threshold = sel.threshold;
    detail::finish(round, decision, transcript);
    return decision;
}

inline Decision averaged_bc(const std::vector<StatVector>& nodes, double alpha, unsigned q,
                            netsim::Transcript* transcript = nullptr) {
    return averaged_bc(nodes, alpha, q, compression::MagnitudeQuantizer{}, transcript);
}

// Simplified sign+BH baseline: nodes transmit signs only (one bit per
// statistic); the center forms an exact per-variable sign-test p-value from
// the negative-sign counts across nodes and applies BH. This deliberately
// ignores magnitude-based ordering and is labeled "simplified" in outputs.
inline Decision sign_bh_baseline(const std::vector<StatVector>& nodes, double alpha,
                                 netsim::Transcript* transcript = nullptr) {
    detail::validate_nodes(nodes, "sign_bh_baseline");
    detail::validate_alpha(alpha, "sign_bh_baseline");
    detail::validate_equal_lengths(nodes, "sign_bh_baseline");
    netsim::Round round(nodes.size());
    const std::size_t m = nodes.front().size();
    std::vector<std::uint64_t> negatives(m, 0);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const auto qv = compression::quantize_signed(nodes[i].values, 1);
        round.uplink(i, netsim::make_signed_quantized(qv.signed_values(), 1));
        for (std::size_t j = 0; j < m; ++j) {
            if (qv.signs[j] < 0) ++negatives[j];
        }
    }
    std::vector<double> pvalues(m);
    for (std::size_t j = 0; j < m; ++j) {
        pvalues[j] = stats::sign_test_pvalue(negatives[j], nodes.size());
    }
    const IndexSet rejected = stats::bh_select(pvalues, alpha);
    round.broadcast(netsim::make_rejected_set(rejected, m));
    Decision decision;
    decision.per_node_rejections = std::vector<IndexSet>(nodes.size(), rejected);
    detail::finish(round, decision, transcript);
    return decision;
}

// ---------------------------------------------------------------------------
// Protocol handles
// ---------------------------------------------------------------------------

enum class Method {
    pooled_qbc,
    sampled_bc,
    pooled_bc_baseline,
    global_pooled_qbc,
    global_wilcoxon,
    global_sign_test,
    global_sampled_bc,
    wilcoxon_simes,
    sign_simes,
    averaged_bc,
    sign_bh_simplified,
};

enum class Setting { individual, global, intersection };

inline Setting method_setting(Method method) {
    switch (method) {
        case Method::pooled_qbc:
        case Method::sampled_bc:
        case Method::pooled_bc_baseline:
            return Setting::individual;
        case Method::global_pooled_qbc:
        case Method::global_wilcoxon:
        case Method::global_sign_test:
        case Method::global_sampled_bc:
        case Method::wilcoxon_simes:
        case Method::sign_simes:
            return Setting::global;
        case Method::averaged_bc:
        case Method::sign_bh_simplified:
            return Setting::intersection;
    }
    throw std::invalid_argument("method_setting: unknown method");
}

// Methods whose error control holds at any sample size (as opposed to the
// asymptotic-only Wilcoxon-based tests).
inline bool method_finite_sample_valid(Method method) {
    return method != Method::global_wilcoxon && method != Method::wilcoxon_simes;
}

inline std::string_view method_name(Method method) {
    switch (method) {
        case Method::pooled_qbc: return "pooled_qbc";
        case Method::sampled_bc: return "sampled_bc";
        case Method::pooled_bc_baseline: return "pooled_bc";
        case Method::global_pooled_qbc: return "global_pooled_qbc";
        case Method::global_wilcoxon: return "global_wilcoxon";
        case Method::global_sign_test: return "global_sign_test";
        case Method::global_sampled_bc: return "global_sampled_bc";
        case Method::wilcoxon_simes: return "wilcoxon_simes";
        case Method::sign_simes: return "sign_simes";
        case Method::averaged_bc: return "averaged_bc";
        case Method::sign_bh_simplified: return "sign_bh_simplified";
    }
    return "unknown";
}

inline std::optional<Method> method_from_name(std::string_view name) {
    for (Method m : {Method::pooled_qbc, Method::sampled_bc, Method::pooled_bc_baseline,
                     Method::global_pooled_qbc, Method::global_wilcoxon,
                     Method::global_sign_test, Method::global_sampled_bc,
                     Method::wilcoxon_simes, Method::sign_simes, Method::averaged_bc,
                     Method::sign_bh_simplified}) {
        if (method_name(m) == name) return m;
    }
    return std::nullopt;
}

inline std::vector<Method> all_methods() {
    return {Method::pooled_qbc,       Method::sampled_bc,     Method::pooled_bc_baseline,
            Method::global_pooled_qbc, Method::global_wilcoxon, Method::global_sign_test,
            Method::global_sampled_bc, Method::wilcoxon_simes,  Method::sign_simes,
            Method::averaged_bc,       Method::sign_bh_simplified};
}

struct ProtocolParams {
    double alpha = 0.2;
    unsigned q = 4;                  // quantization levels for magnitudes
    unsigned L = 5;                  // sampling grid size
    unsigned k = 16;                 // p-value quantization levels
    std::vector<unsigned> k_levels;  // per-node override; empty = uniform k
    bool censor = false;             // Simes-transmission censoring
};

inline Decision run_protocol(Method method, const std::vector<StatVector>& nodes,
                             const ProtocolParams& params,
                             netsim::Transcript* transcript = nullptr) {
    auto levels = [&] {
        return params.k_levels.empty()
                   ? std::vector<unsigned>(nodes.size(), params.k)
                   : params.k_levels;
    };
    switch (method) {
        case Method::pooled_qbc:
            return pooled_qbc(nodes, params.alpha, params.q, transcript);
        case Method::sampled_bc:
            return sampled_bc(nodes, params.alpha, params.L, transcript);
        case Method::pooled_bc_baseline:
            return pooled_bc_baseline(nodes, params.alpha, transcript);
        case Method::global_pooled_qbc:
            return global_pooled_qbc(nodes, params.alpha, params.q, transcript);
        case Method::global_wilcoxon:
            return global_wilcoxon(nodes, params.alpha, params.q, transcript);
        case Method::global_sign_test:
            return global_sign_test(nodes, params.alpha, transcript);
        case Method::global_sampled_bc:
            return global_sampled_bc(nodes, params.alpha, params.L, transcript);
        case Method::wilcoxon_simes:
            return wilcoxon_simes(nodes, params.alpha, levels(), params.censor, transcript);
        case Method::sign_simes:
            return sign_simes(nodes, params.alpha, levels(), params.censor, transcript);
        case Method::averaged_bc:
            return averaged_bc(nodes, params.alpha, params.q, transcript);
        case Method::sign_bh_simplified:
            return sign_bh_baseline(nodes, params.alpha, transcript);
    }
    throw std::invalid_argument("run_protocol: unknown method");
}

}  // namespace starfdr::protocols

namespace starfdr::netsim {

// Execute one full uplink-compute-broadcast round for the given protocol
// handle, checking the inputs against the topology first.
inline std::pair<protocols::Decision, Transcript> run_round(
    const StarTopology& topology, protocols::Method method,
    const std::vector<StatVector>& inputs, const protocols::ProtocolParams& params) {
    topology.validate();
    if (inputs.size() != topology.num_nodes) {
        throw std::invalid_argument("run_round: node count does not match topology");
    }
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (inputs[i].size() != topology.per_node_m[i]) {
            throw std::invalid_argument("run_round: statistics length does not match topology");
        }
    }
    Transcript transcript;
    protocols::Decision decision =
        protocols::run_protocol(method, inputs, params, &transcript);
    return {std::move(decision), std::move(transcript)};
}

}  // namespace starfdr::netsim
