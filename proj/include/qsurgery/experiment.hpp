#pragma once

#include "qsurgery/circuit.hpp"
#include "qsurgery/decoder.hpp"
#include "qsurgery/distill.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace qsurgery {

/// Pauli-frame correction closing the injection sequence (measure X on the
/// target, the joint Z pair, then x on the source): returns the exponents
/// (z_power, x_power) = (mu1 xor mu3, mu2) of the fix-up operator.
std::pair<int, int> injection_frame(int mu1, int mu2, int mu3);

struct PowerLawPoint {
    double p = 0.0;
    double p_l = 0.0;
    double sigma = 0.0;
};

/// Weighted least-squares fit of p_L = alpha * p^d_cir on log-log axes,
/// weighting each point by its relative error sigma/p_L.
struct PowerLawFit {
    double alpha = 0.0;
    double d_cir = 0.0;
    /// Parameter covariance, order [log alpha, d_cir].
    std::array<std::array<double, 2>, 2> cov{};
    std::size_t points = 0; // points used (p_L > 0)

    double sigma_d() const;
};

/// Throws std::invalid_argument with fewer than 3 usable points (p_L > 0,
/// sigma > 0).
PowerLawFit fit_power_law(const std::vector<PowerLawPoint>& pts);

/// Per-shot event indicators derived from decoding residuals (true flip XOR
/// predicted flip). On the z side, event j is the symmetric difference of a
/// residual on the bare register operator Z_j and one on the extracted
/// outcome oc_j; on the x side, event j is a residual on the pair X_j x_j.
/// Pairs j = 0, 1 carry the conventional names A, B (z side) and C, D (x
/// side).
struct EventStream {
    std::vector<std::string> names;
    std::size_t shots = 0;
    std::vector<std::vector<std::uint8_t>> bits; // [event][shot]
};

EventStream classify_events(const InjectionExperiment& exp, const DecodeReport& rep,
                            PauliBasis side);

/// Independence test between two binary event streams: z is the sample
/// phi-coefficient times sqrt(shots) (a standard normal under the null).
/// `sufficient` is false when either marginal shows no variation, in which
/// case z is reported as 0 and must not be interpreted.
struct PairIndependence {
    std::string pair;
    double p = 0.0; // physical rate of the run this pair came from
    std::size_t shots = 0, n_first = 0, n_second = 0, n_both = 0;
    double p_first = 0.0, p_second = 0.0, p_both = 0.0;
    double z = 0.0;
    bool sufficient = false;
    std::array<double, 2> wilson_first{};  // 95% Wilson interval
    std::array<double, 2> wilson_second{};
};

PairIndependence independence_pair(const std::string& name,
                                   const std::vector<std::uint8_t>& first,
                                   const std::vector<std::uint8_t>& second);

/// Tests consecutive event pairs (0,1), (2,3), ... of the stream.
std::vector<PairIndependence> independence_report(const EventStream& ev);

/// Code family selector for configs: "surface" (param d), "repetition"
/// (param d; X-side chain), or "bb" (params l, m, a, b).
struct CodeSpec {
    std::string family = "surface";
    std::size_t d = 3;
    std::size_t l = 0, m = 0;
    std::vector<BBTerm> a, b;
};

CssCode make_code(const CodeSpec& spec);

/// Returns the same code in a logical basis whose first q Z rows are the
/// measured classes with pairwise support-disjoint representatives, as the
/// seam layout requires. Targets name original Z logicals to measure (empty
/// = free choice, preferring few-logical classes and light supports).
/// Representatives are reduced modulo Z stabilizers; the X basis is adjusted
/// to keep the logical pairing the identity. Throws std::invalid_argument
/// when no disjoint layout exists within the search budget.
CssCode select_measured_basis(const CssCode& reg, std::size_t q,
                              const std::vector<std::size_t>& targets = {});

struct ExperimentConfig {
    std::string mode = "memory"; // memory | surgery | audit | distill
    CodeSpec register_code;
    CodeSpec noisy_code{"surface", 2, 0, 0, {}, {}};
    std::size_t q = 0;
    std::vector<std::size_t> targets; // register logicals; empty = first q
    std::size_t d_r = 2, d_t = 2;
    PauliBasis prep = PauliBasis::z;
    std::vector<double> ps;
    std::size_t shots = 10000;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    std::size_t rounds = 0;   // memory-mode rounds; 0 means 3 * d_t
    std::size_t audit_cap = 4;
    double control_p = 0.0;   // > 0 injects a shared two-block error channel
    std::vector<double> distill_q, distill_r;
};

/// Parses and validates the JSON config text; throws std::invalid_argument
/// with a message naming the offending field.
ExperimentConfig parse_config_json(const std::string& text);

/// Canonical single-line JSON rendering (fixed key order and number format);
/// equal configs produce equal strings.
std::string canonical_config(const ExperimentConfig& cfg);

/// FNV-1a over the canonical rendering.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Per-shot decoding of one detector side split over `workers` threads.
/// Shots map to fixed slots, so the result is byte-identical for any worker
/// count. Covers only the observables of the chosen side.
DecodeReport decode_shots_parallel(const DetectorModel& dm, const ShotBatch& batch,
                                   PauliBasis side, std::size_t workers,
                                   const DecodeOptions& opts = {});

/// Executes the configured mode end to end and writes the artifact CSV/JSON
/// files (each with a provenance header) into out_dir. The returned report
/// lists the gate checks evaluated by the mode; the file list is in creation
/// order.
struct RunResult {
    std::vector<std::string> files;
    Report gates;
    /// Independence rows emitted by surgery mode (one per pair and p value).
    std::vector<PairIndependence> events;
    /// Labeled power-law fits ("surgery:idle", "memory:idle", per-observable).
    std::vector<std::pair<std::string, PowerLawFit>> fits;
};

RunResult run_config(const ExperimentConfig& cfg, const std::string& out_dir);

} // namespace qsurgery
