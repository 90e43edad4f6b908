#include "qsurgery/experiment.hpp"

#include "qsurgery/distance.hpp"
#include "qsurgery/spacetime.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>

namespace qsurgery {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t seed_for(std::uint64_t seed, std::size_t index) {
    return seed + 1000003ull * static_cast<std::uint64_t>(index);
}

} // namespace

std::pair<int, int> injection_frame(int mu1, int mu2, int mu3) {
    for (int m : {mu1, mu2, mu3})
        if (m != 0 && m != 1)
            throw std::invalid_argument("injection_frame: outcomes must be bits");
    return {mu1 ^ mu3, mu2};
}

double PowerLawFit::sigma_d() const { return std::sqrt(cov[1][1]); }

PowerLawFit fit_power_law(const std::vector<PowerLawPoint>& pts) {
    double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t used = 0;
    for (const auto& pt : pts) {
        if (!(pt.p_l > 0.0)) continue;
        if (!(pt.p > 0.0) || !(pt.sigma > 0.0))
            throw std::invalid_argument("fit_power_law: usable points need p > 0 and sigma > 0");
        const double x = std::log(pt.p), y = std::log(pt.p_l);
        const double w = (pt.p_l / pt.sigma) * (pt.p_l / pt.sigma);
        s += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
        ++used;
    }
    if (used < 3)
        throw std::invalid_argument("fit_power_law: need at least 3 points with p_L > 0");
    const double det = s * sxx - sx * sx;
    if (det <= 0.0)
        throw std::invalid_argument("fit_power_law: degenerate design (identical p values?)");
    PowerLawFit fit;
    fit.points = used;
    const double intercept = (sxx * sy - sx * sxy) / det;
    fit.d_cir = (s * sxy - sx * sy) / det;
    fit.alpha = std::exp(intercept);
    fit.cov[0][0] = sxx / det;
    fit.cov[0][1] = fit.cov[1][0] = -sx / det;
    fit.cov[1][1] = s / det;
    return fit;
}

EventStream classify_events(const InjectionExperiment& exp, const DecodeReport& rep,
                            PauliBasis side) {
    const std::size_t q = exp.obs_oc.size();
    EventStream ev;
    ev.shots = rep.shots;
    auto residual = [&](std::size_t obs) {
        if (obs >= rep.covered.size() || !rep.covered[obs])
            throw std::invalid_argument(
                "classify_events: decode report does not cover observable " +
                std::to_string(obs));
        return obs;
    };
    for (std::size_t j = 0; j < q; ++j) {
        std::vector<std::uint8_t> bits(rep.shots, 0);
        std::string name;
        if (side == PauliBasis::z) {
            const std::size_t oz = residual(exp.obs_z.at(j));
            const std::size_t oo = residual(exp.obs_oc.at(j));
            for (std::size_t s = 0; s < rep.shots; ++s)
                bits[s] = static_cast<std::uint8_t>(rep.err_bit(s, oz) ^ rep.err_bit(s, oo));
            name = j == 0 ? "A" : j == 1 ? "B" : "Zpair" + std::to_string(j + 1);
        } else {
            const std::size_t ox = residual(exp.obs_x.at(j));
            for (std::size_t s = 0; s < rep.shots; ++s)
                bits[s] = static_cast<std::uint8_t>(rep.err_bit(s, ox));
            name = j == 0 ? "C" : j == 1 ? "D" : "Xpair" + std::to_string(j + 1);
        }
        ev.names.push_back(std::move(name));
        ev.bits.push_back(std::move(bits));
    }
    return ev;
}

PairIndependence independence_pair(const std::string& name,
                                   const std::vector<std::uint8_t>& first,
                                   const std::vector<std::uint8_t>& second) {
    if (first.size() != second.size() || first.empty())
        throw std::invalid_argument("independence_pair: streams must be equal and nonempty");
    PairIndependence r;
    r.pair = name;
    r.shots = first.size();
    for (std::size_t s = 0; s < first.size(); ++s) {
        r.n_first += first[s] != 0;
        r.n_second += second[s] != 0;
        r.n_both += (first[s] & second[s]) != 0;
    }
    const double n = static_cast<double>(r.shots);
    r.p_first = r.n_first / n;
    r.p_second = r.n_second / n;
    r.p_both = r.n_both / n;
    r.sufficient = r.n_first > 0 && r.n_first < r.shots && r.n_second > 0 &&
                   r.n_second < r.shots;
    if (r.sufficient)
        r.z = (r.p_both - r.p_first * r.p_second) * std::sqrt(n) /
              std::sqrt(r.p_first * (1 - r.p_first) * r.p_second * (1 - r.p_second));
    auto wilson = [&](std::size_t count) -> std::array<double, 2> {
        const double z0 = 1.959963984540054;
        const double ph = count / n;
        const double den = 1.0 + z0 * z0 / n;
        const double center = (ph + z0 * z0 / (2 * n)) / den;
        const double half =
            z0 * std::sqrt(ph * (1 - ph) / n + z0 * z0 / (4 * n * n)) / den;
        return {center - half, center + half};
    };
    r.wilson_first = wilson(r.n_first);
    r.wilson_second = wilson(r.n_second);
    return r;
}

std::vector<PairIndependence> independence_report(const EventStream& ev) {
    std::vector<PairIndependence> out;
    for (std::size_t j = 0; j + 1 < ev.names.size(); j += 2)
        out.push_back(independence_pair(ev.names[j] + ev.names[j + 1], ev.bits[j],
                                        ev.bits[j + 1]));
    return out;
}

CssCode make_code(const CodeSpec& spec) {
    if (spec.family == "surface") return make_surface(spec.d);
    if (spec.family == "repetition") {
        if (spec.d < 2)
            throw std::invalid_argument("make_code: repetition needs d >= 2");
        CssCode code;
        code.h_x = BitMatrix(0, spec.d);
        code.h_z = make_repetition_chain(spec.d);
        code.j_z = BitMatrix(1, spec.d);
        code.j_z.set(0, 0, true);
        code.j_x = BitMatrix(1, spec.d);
        for (std::size_t i = 0; i < spec.d; ++i) code.j_x.set(0, i, true);
        code.ensure_valid("make_code repetition");
        return code;
    }
    if (spec.family == "bb") return make_bivariate_bicycle(spec.l, spec.m, spec.a, spec.b);
    throw std::invalid_argument("make_code: unknown family '" + spec.family + "'");
}

namespace {

bool disjoint(const BitVector& a, const BitVector& b) {
    const auto wa = a.words(), wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i)
        if (wa[i] & wb[i]) return false;
    return true;
}

bool lex_less(const BitVector& a, const BitVector& b) {
    const auto wa = a.words(), wb = b.words();
    for (std::size_t i = 0; i < wa.size(); ++i)
        if (wa[i] != wb[i]) return wa[i] < wb[i];
    return false;
}

} // namespace

CssCode select_measured_basis(const CssCode& reg, std::size_t q,
                              const std::vector<std::size_t>& targets) {
    const std::size_t k = reg.k(), n = reg.n();
    if (q == 0) return reg;
    if (q > k)
        throw std::invalid_argument("select_measured_basis: q exceeds register logicals");
    for (std::size_t t : targets)
        if (t >= k)
            throw std::invalid_argument("select_measured_basis: target exceeds logicals");
    if (targets.empty() && k > 16)
        throw std::invalid_argument(
            "select_measured_basis: free class choice supports at most 16 logicals; "
            "name explicit targets");

    // All elements of the Z-stabilizer row space (representative shifts),
    // capped: beyond 16 independent rows only the raw representatives are
    // tried.
    const RrefResult rr = rref(reg.h_z);
    std::vector<BitVector> shifts;
    if (rr.rank <= 16) {
        shifts.assign(std::size_t{1} << rr.rank, BitVector(n));
        for (std::size_t m = 1; m < shifts.size(); ++m) {
            const std::size_t low = std::countr_zero(m);
            shifts[m] = shifts[m ^ (std::size_t{1} << low)] ^ rr.r.row(low);
        }
    } else {
        shifts.assign(1, BitVector(n));
    }

    // Candidate measured classes, as masks over the logical basis.
    std::vector<std::uint32_t> class_order;
    if (!targets.empty()) {
        if (targets.size() != q)
            throw std::invalid_argument("select_measured_basis: need one target per pair");
        for (std::size_t j = 0; j < q; ++j) {
            for (std::size_t i = 0; i < j; ++i)
                if (targets[i] == targets[j])
                    throw std::invalid_argument(
                        "select_measured_basis: duplicate target");
            class_order.push_back(1u << targets[j]);
        }
    } else {
        for (std::uint32_t m = 1; m < (1u << k); ++m) class_order.push_back(m);
        std::sort(class_order.begin(), class_order.end(),
                  [](std::uint32_t a, std::uint32_t b) {
                      const int pa = std::popcount(a), pb = std::popcount(b);
                      return pa != pb ? pa < pb : a < b;
                  });
    }

    auto class_rep = [&](std::uint32_t mask) {
        BitVector v(n);
        for (std::size_t r = 0; r < k; ++r)
            if (mask >> r & 1) v ^= reg.j_z.row(r);
        return v;
    };
    // Representative candidates per class, lightest first, deterministic.
    auto candidates = [&](std::uint32_t mask) {
        std::vector<BitVector> cs;
        cs.reserve(shifts.size());
        const BitVector raw = class_rep(mask);
        for (const auto& s : shifts) cs.push_back(raw ^ s);
        std::sort(cs.begin(), cs.end(), [](const BitVector& a, const BitVector& b) {
            const std::size_t wa = a.weight(), wb = b.weight();
            return wa != wb ? wa < wb : lex_less(a, b);
        });
        return cs;
    };

    // Depth-first assignment of (class, representative) per measured pair,
    // keeping class masks independent and supports disjoint from the union.
    std::vector<std::uint32_t> chosen_masks;
    std::vector<BitVector> chosen_reps;
    std::size_t budget = 1u << 22;
    auto independent_of_chosen = [&](std::uint32_t mask) {
        std::vector<std::uint32_t> vs = chosen_masks;
        vs.push_back(mask);
        std::size_t rank = 0;
        for (int bit = 31; bit >= 0 && rank < vs.size(); --bit) {
            std::size_t pivot = vs.size();
            for (std::size_t i = rank; i < vs.size(); ++i)
                if (vs[i] >> bit & 1) {
                    pivot = i;
                    break;
                }
            if (pivot == vs.size()) continue;
            std::swap(vs[rank], vs[pivot]);
            for (std::size_t i = 0; i < vs.size(); ++i)
                if (i != rank && (vs[i] >> bit & 1)) vs[i] ^= vs[rank];
            ++rank;
        }
        return rank == vs.size();
    };
    std::function<bool(std::size_t)> assign = [&](std::size_t j) -> bool {
        if (j == q) return true;
        for (std::uint32_t mask :
             targets.empty() ? class_order : std::vector<std::uint32_t>{class_order[j]}) {
            if (targets.empty()) {
                bool used = false;
                for (std::uint32_t c : chosen_masks) used = used || c == mask;
                if (used || !independent_of_chosen(mask)) continue;
            }
            for (const BitVector& rep : candidates(mask)) {
                if (budget == 0)
                    throw std::invalid_argument(
                        "select_measured_basis: search budget exhausted");
                --budget;
                bool ok = true;
                for (const auto& prev : chosen_reps) ok = ok && disjoint(rep, prev);
                if (!ok) continue;
                chosen_masks.push_back(mask);
                chosen_reps.push_back(rep);
                if (assign(j + 1)) return true;
                chosen_masks.pop_back();
                chosen_reps.pop_back();
            }
        }
        return false;
    };
    if (!assign(0))
        throw std::invalid_argument(
            "select_measured_basis: no support-disjoint representatives found" +
            std::string(targets.empty() ? "" : " for the requested targets"));

    // Basis-change matrix M: measured classes first, completed to full rank
    // by unit vectors.
    BitMatrix m(k, k);
    for (std::size_t j = 0; j < q; ++j)
        for (std::size_t r = 0; r < k; ++r)
            if (chosen_masks[j] >> r & 1) m.set(j, r, true);
    std::size_t filled = q;
    for (std::size_t e = 0; e < k && filled < k; ++e) {
        m.set(filled, e, true);
        if (rref(m.block(0, 0, filled + 1, k)).rank == filled + 1)
            ++filled;
        else
            m.set(filled, e, false);
    }
    if (filled != k)
        throw std::logic_error("select_measured_basis: basis completion failed");

    const auto minv = solve_right(m, BitMatrix::identity(k));
    if (!minv) throw std::logic_error("select_measured_basis: basis not invertible");

    CssCode out = reg;
    out.j_z = m * reg.j_z;
    for (std::size_t j = 0; j < q; ++j) out.j_z.set_row(j, chosen_reps[j]);
    out.j_x = minv->transposed() * reg.j_x;
    out.ensure_valid("select_measured_basis");
    return out;
}

namespace {

CodeSpec parse_code_spec(const json& j, const std::string& where) {
    CodeSpec spec;
    if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
    spec.family = j.value("family", std::string("surface"));
    spec.d = j.value("d", std::size_t{3});
    spec.l = j.value("l", std::size_t{0});
    spec.m = j.value("m", std::size_t{0});
    auto terms = [&](const char* key) {
        std::vector<BBTerm> out;
        if (!j.contains(key)) return out;
        for (const auto& t : j.at(key)) {
            if (!t.is_array() || t.size() != 2)
                throw std::invalid_argument(where + "." + key + ": entries are [a, b] pairs");
            out.push_back({t.at(0).get<std::size_t>(), t.at(1).get<std::size_t>()});
        }
        return out;
    };
    spec.a = terms("a");
    spec.b = terms("b");
    if (spec.family == "bb" && (spec.l == 0 || spec.m == 0 || spec.a.empty() || spec.b.empty()))
        throw std::invalid_argument(where + ": bb needs l, m, a, b");
    return spec;
}

std::string render_code_spec(const CodeSpec& s) {
    std::string out = "{\"family\":\"" + s.family + "\",\"d\":" + std::to_string(s.d) +
                      ",\"l\":" + std::to_string(s.l) + ",\"m\":" + std::to_string(s.m) +
                      ",\"a\":[";
    for (std::size_t i = 0; i < s.a.size(); ++i)
        out += (i ? "," : "") + std::string("[") + std::to_string(s.a[i].a) + "," +
               std::to_string(s.a[i].b) + "]";
    out += "],\"b\":[";
    for (std::size_t i = 0; i < s.b.size(); ++i)
        out += (i ? "," : "") + std::string("[") + std::to_string(s.b[i].a) + "," +
               std::to_string(s.b[i].b) + "]";
    return out + "]}";
}

} // namespace

ExperimentConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    ExperimentConfig cfg;
    cfg.mode = j.value("mode", std::string("memory"));
    if (cfg.mode != "memory" && cfg.mode != "surgery" && cfg.mode != "audit" &&
        cfg.mode != "distill")
        throw std::invalid_argument("config.mode: must be memory|surgery|audit|distill");
    if (j.contains("register")) cfg.register_code = parse_code_spec(j.at("register"), "config.register");
    if (j.contains("noisy")) cfg.noisy_code = parse_code_spec(j.at("noisy"), "config.noisy");
    cfg.q = j.value("q", std::size_t{0});
    if (j.contains("targets")) cfg.targets = j.at("targets").get<std::vector<std::size_t>>();
    cfg.d_r = j.value("d_r", std::size_t{2});
    cfg.d_t = j.value("d_t", std::size_t{2});
    const std::string prep = j.value("prep", std::string("z"));
    if (prep != "z" && prep != "x")
        throw std::invalid_argument("config.prep: must be \"z\" or \"x\"");
    cfg.prep = prep == "z" ? PauliBasis::z : PauliBasis::x;
    if (j.contains("p")) {
        if (j.at("p").is_number()) cfg.ps = {j.at("p").get<double>()};
        else cfg.ps = j.at("p").get<std::vector<double>>();
    }
    for (double p : cfg.ps)
        if (p < 0.0 || p >= 0.5)
            throw std::invalid_argument("config.p: values must lie in [0, 0.5)");
    cfg.shots = j.value("shots", std::size_t{10000});
    if (cfg.shots < 1) throw std::invalid_argument("config.shots: must be >= 1");
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.workers = j.value("workers", std::size_t{1});
    if (cfg.workers < 1) throw std::invalid_argument("config.workers: must be >= 1");
    cfg.rounds = j.value("rounds", std::size_t{0});
    cfg.audit_cap = j.value("audit_cap", std::size_t{4});
    cfg.control_p = j.value("control_p", 0.0);
    if (cfg.control_p < 0.0 || cfg.control_p > 0.5)
        throw std::invalid_argument("config.control_p: must lie in [0, 0.5]");
    if (j.contains("distill")) {
        const auto& d = j.at("distill");
        cfg.distill_q = d.value("q", std::vector<double>{});
        cfg.distill_r = d.value("r", std::vector<double>{});
    }
    if (cfg.mode == "surgery" && cfg.q < 1)
        throw std::invalid_argument("config: surgery mode needs q >= 1");
    if (!cfg.targets.empty() && cfg.targets.size() != cfg.q)
        throw std::invalid_argument("config.targets: size must equal q");
    if (cfg.mode == "distill" && (cfg.distill_q.empty() || cfg.distill_r.empty()))
        throw std::invalid_argument("config: distill mode needs distill.q and distill.r");
    for (double v : cfg.distill_q)
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("config.distill.q: values in [0,1]");
    for (double v : cfg.distill_r)
        if (v < 0.0 || v > 1.0) throw std::invalid_argument("config.distill.r: values in [0,1]");
    if ((cfg.mode == "memory" || cfg.mode == "surgery") && cfg.ps.empty())
        throw std::invalid_argument("config: sampling modes need a p list");
    return cfg;
}

std::string canonical_config(const ExperimentConfig& cfg) {
    std::string out = "{\"mode\":\"" + cfg.mode + "\",\"register\":" +
                      render_code_spec(cfg.register_code) +
                      ",\"noisy\":" + render_code_spec(cfg.noisy_code) +
                      ",\"q\":" + std::to_string(cfg.q) + ",\"targets\":[";
    for (std::size_t i = 0; i < cfg.targets.size(); ++i)
        out += (i ? "," : "") + std::to_string(cfg.targets[i]);
    out += "],\"d_r\":" + std::to_string(cfg.d_r) + ",\"d_t\":" + std::to_string(cfg.d_t) +
           ",\"prep\":\"" + (cfg.prep == PauliBasis::z ? "z" : "x") + "\",\"p\":[";
    for (std::size_t i = 0; i < cfg.ps.size(); ++i) out += (i ? "," : "") + fmt(cfg.ps[i]);
    out += "],\"shots\":" + std::to_string(cfg.shots) +
           ",\"seed\":" + std::to_string(cfg.seed) +
           ",\"rounds\":" + std::to_string(cfg.rounds) +
           ",\"audit_cap\":" + std::to_string(cfg.audit_cap) +
           ",\"control_p\":" + fmt(cfg.control_p) + ",\"distill_q\":[";
    for (std::size_t i = 0; i < cfg.distill_q.size(); ++i)
        out += (i ? "," : "") + fmt(cfg.distill_q[i]);
    out += "],\"distill_r\":[";
    for (std::size_t i = 0; i < cfg.distill_r.size(); ++i)
        out += (i ? "," : "") + fmt(cfg.distill_r[i]);
    return out + "]}";
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a(canonical_config(cfg)); }

DecodeReport decode_shots_parallel(const DetectorModel& dm, const ShotBatch& batch,
                                   PauliBasis side, std::size_t workers,
                                   const DecodeOptions& opts) {
    if (batch.num_detectors != dm.num_detectors ||
        batch.num_observables != dm.num_observables)
        throw std::invalid_argument("decode_shots_parallel: batch does not match the model");
    DecodeReport rep;
    rep.shots = batch.shots;
    rep.num_observables = dm.num_observables;
    rep.err.assign(batch.shots * rep.obs_words(), 0);
    rep.covered.assign(dm.num_observables, 0);

    const DecodeProblem base = make_decode_problem(dm, side);
    if (base.num_observables == 0) return rep;
    for (auto o : base.observable_ids) rep.covered[o] = 1;

    auto run_range = [&](std::size_t lo, std::size_t hi) {
        DecodeProblem pr = base;
        std::vector<std::uint8_t> predicted(pr.num_observables);
        for (std::size_t s = lo; s < hi; ++s) {
            for (std::size_t c = 0; c < pr.num_checks; ++c)
                pr.syndrome.set(c, batch.det_bit(s, pr.detector_ids[c]));
            std::fill(predicted.begin(), predicted.end(), 0);
            bool failed_shot = false;
            try {
                const BitVector corr = decode_syndrome(pr, opts);
                for (std::size_t f = 0; f < pr.num_faults(); ++f)
                    if (corr.get(f))
                        for (auto o : pr.fault_obs[f]) predicted[o] ^= 1;
            } catch (const SingularSelection&) {
                failed_shot = true;
            }
            for (std::size_t o = 0; o < pr.num_observables; ++o) {
                const std::size_t oc = pr.observable_ids[o];
                if (failed_shot || (predicted[o] != batch.obs_bit(s, oc)))
                    rep.err[s * rep.obs_words() + oc / 64] |= 1ull << (oc % 64);
            }
        }
    };

    const std::size_t nw = std::max<std::size_t>(1, std::min(workers, batch.shots));
    if (nw == 1) {
        run_range(0, batch.shots);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (batch.shots + nw - 1) / nw;
        for (std::size_t w = 0; w < nw; ++w) {
            const std::size_t lo = w * chunk, hi = std::min(batch.shots, lo + chunk);
            if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    }

    for (auto oc : base.observable_ids) {
        ObservableStats st;
        st.observable = oc;
        st.name = dm.observable_names[oc];
        st.shots = batch.shots;
        for (std::size_t s = 0; s < batch.shots; ++s) st.failures += rep.err_bit(s, oc);
        st.p_l = batch.shots ? double(st.failures) / double(batch.shots) : 0.0;
        st.sigma = batch.shots
                       ? std::sqrt(st.p_l * (1.0 - st.p_l) / double(batch.shots))
                       : 0.0;
        rep.stats.push_back(std::move(st));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Orchestration

namespace {

struct ArtifactWriter {
    std::string dir;
    std::uint64_t hash = 0;
    std::uint64_t seed = 0;
    std::vector<std::string>* files = nullptr;

    std::ofstream open(const std::string& name) const {
        std::filesystem::create_directories(dir);
        const std::string path = dir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path);
        char head[128];
        std::snprintf(head, sizeof head,
                      "# qsurgery artifact\n# config_hash=%016llx\n# seed=%llu\n",
                      static_cast<unsigned long long>(hash),
                      static_cast<unsigned long long>(seed));
        out << head;
        files->push_back(name);
        return out;
    }
};

/// Failure fraction of the union of the given circuit observables.
PowerLawPoint pooled_point(const DecodeReport& rep, const std::vector<std::size_t>& obs,
                           double p) {
    std::size_t failures = 0;
    for (std::size_t s = 0; s < rep.shots; ++s) {
        bool any = false;
        for (std::size_t o : obs) any = any || rep.err_bit(s, o);
        failures += any;
    }
    PowerLawPoint pt;
    pt.p = p;
    pt.p_l = rep.shots ? double(failures) / double(rep.shots) : 0.0;
    pt.sigma = rep.shots ? std::sqrt(pt.p_l * (1.0 - pt.p_l) / double(rep.shots)) : 0.0;
    return pt;
}

void write_stat_rows(std::ofstream& out, double p, const DecodeReport& rep) {
    for (const auto& st : rep.stats)
        out << fmt(p) << ',' << st.name << ',' << st.shots << ',' << st.failures << ','
            << fmt(st.p_l) << ',' << fmt(st.sigma) << '\n';
}

void append_fit(RunResult& res, std::ofstream& fits, const std::string& label,
                const std::vector<PowerLawPoint>& pts) {
    std::size_t usable = 0;
    for (const auto& pt : pts) usable += pt.p_l > 0.0;
    if (usable < 3) return;
    const PowerLawFit fit = fit_power_law(pts);
    fits << label << ',' << fmt(fit.alpha) << ',' << fmt(fit.d_cir) << ','
         << fmt(fit.sigma_d()) << ',' << fit.points << '\n';
    res.fits.emplace_back(label, fit);
}

void run_sampling_leg(const ExperimentConfig& cfg, const ArtifactWriter& aw,
                      RunResult& res, const std::string& label, const Circuit& circuit,
                      const InjectionExperiment* exp, const BitVector* control_xs,
                      const BitVector* control_zs, std::size_t control_step) {
    std::ofstream stats = aw.open(label + ".csv");
    stats << "p,observable,shots,failures,p_L,sigma\n";
    std::ofstream events;
    const bool with_events = exp && !exp->obs_oc.empty();
    if (with_events) {
        events = aw.open("events.csv");
        events << "p,event_pair,pA,pB,pAB,z\n";
    }

    // Per-observable fit points, keyed by stat order of the first p (stable
    // across p: same model structure).
    std::vector<std::vector<PowerLawPoint>> per_obs;
    std::vector<std::string> obs_names;
    std::vector<PowerLawPoint> pooled_idle, pooled_all;

    for (std::size_t pi = 0; pi < cfg.ps.size(); ++pi) {
        const double p = cfg.ps[pi];
        NoisyCircuit nc = apply_noise(circuit, NoiseModel{p});
        if (exp && cfg.control_p > 0.0)
            add_pauli_channel(nc, control_step, *control_xs, *control_zs, cfg.control_p,
                              /*hidden=*/true);
        const DetectorModel dm = derive_detector_model(nc);
        const ShotBatch batch = sample_model(dm, cfg.shots, seed_for(cfg.seed, pi));
        const DecodeReport rep =
            decode_shots_parallel(dm, batch, cfg.prep, cfg.workers);
        write_stat_rows(stats, p, rep);

        if (per_obs.empty()) {
            per_obs.resize(rep.stats.size());
            for (const auto& st : rep.stats) obs_names.push_back(st.name);
        }
        for (std::size_t i = 0; i < rep.stats.size(); ++i)
            per_obs[i].push_back({p, rep.stats[i].p_l, rep.stats[i].sigma});

        // Pool the idle register logicals: observables Z[j]/X[j] with j >= q
        // in surgery legs, every logical in plain memory legs.
        std::vector<std::size_t> idle, all;
        if (exp) {
            const auto& family = cfg.prep == PauliBasis::z ? exp->obs_z : exp->obs_x;
            for (std::size_t j = cfg.q; j < family.size(); ++j) idle.push_back(family[j]);
            for (std::size_t o : family) all.push_back(o);
        } else {
            const char prefix = cfg.prep == PauliBasis::z ? 'Z' : 'X';
            for (std::size_t o = 0; o < dm.num_observables; ++o)
                if (rep.covered[o] && dm.observable_names[o][0] == prefix) {
                    all.push_back(o);
                    const std::size_t j =
                        std::stoul(dm.observable_names[o].substr(2));
                    if (j >= cfg.q) idle.push_back(o);
                }
        }
        pooled_idle.push_back(pooled_point(rep, idle, p));
        pooled_all.push_back(pooled_point(rep, all, p));

        if (with_events) {
            const EventStream ev = classify_events(*exp, rep, cfg.prep);
            for (PairIndependence pr : independence_report(ev)) {
                pr.p = p;
                events << fmt(p) << ',' << pr.pair << ',' << fmt(pr.p_first) << ','
                       << fmt(pr.p_second) << ',' << fmt(pr.p_both) << ',' << fmt(pr.z)
                       << '\n';
                if (!pr.sufficient)
                    res.gates.items.push_back(
                        {label + " events " + pr.pair + " p=" + fmt(p) +
                             ": sufficient statistics",
                         false, "a marginal shows no variation"});
                res.events.push_back(std::move(pr));
            }
        }

        if (p == 0.0) {
            bool clean = true;
            for (const auto& st : rep.stats) clean = clean && st.failures == 0;
            res.gates.items.push_back(
                {label + " p=0 produces zero failures", clean, ""});
        }
    }

    std::ofstream fits = aw.open(label + "_fits.csv");
    fits << "set,alpha,d_cir,sigma_d,points\n";
    append_fit(res, fits, label + ":idle", pooled_idle);
    append_fit(res, fits, label + ":all", pooled_all);
    for (std::size_t i = 0; i < per_obs.size(); ++i)
        append_fit(res, fits, label + ":" + obs_names[i], per_obs[i]);
}

void run_audit(const ExperimentConfig& cfg, const ArtifactWriter& aw, RunResult& res) {
    if (cfg.q == 0) throw std::invalid_argument("audit mode needs q >= 1");
    const CssCode reg =
        select_measured_basis(make_code(cfg.register_code), cfg.q, cfg.targets);
    const CssCode noisy = make_code(cfg.noisy_code);
    const CssCode comp = make_composite(reg, noisy, cfg.q);
    const AlphaPair ap = make_injection_alphas(reg.k(), noisy.k(), cfg.q);
    const GlueCode base = build_graph_glue(comp, ap, GluePolicy::path);
    const DeformedCode dc = assemble_deformed(comp, ap, base, cfg.d_r);

    Report all;
    const std::vector<std::string> problems = comp.validate();
    for (const auto& v : problems) all.items.push_back({"composite: " + v, false, ""});
    if (problems.empty()) all.items.push_back({"composite code valid", true, ""});
    for (const auto& item : verify_surgery_conditions(dc).items)
        all.items.push_back({"surgery: " + item.name, item.pass, item.detail});
    const BoundedPairResult bp =
        check_bounded_pair(dc.glue.h_g, dc.glue.h_m, dc.glue.s, cfg.d_r);
    all.items.push_back({"bounded pair at d_r", bp.bounded, bp.detail});
    const SpacetimeCode sc = build_spacetime(dc, cfg.d_t);
    for (const auto& item : verify_spacetime_consistency(sc, dc).items)
        all.items.push_back({"spacetime: " + item.name, item.pass, item.detail});
    const Theorem1Audit audit = theorem1_audit(sc, dc, cfg.audit_cap);
    for (const auto& item : audit.report.items)
        all.items.push_back({"theorem1: " + item.name, item.pass, item.detail});

    json out;
    out["config_hash"] = fnv1a(canonical_config(cfg));
    out["items"] = json::array();
    for (const auto& item : all.items)
        out["items"].push_back(
            {{"name", item.name}, {"pass", item.pass}, {"detail", item.detail}});
    out["entries"] = json::array();
    for (const auto& e : audit.entries)
        out["entries"].push_back({{"inequality", e.inequality},
                                  {"psi", e.psi},
                                  {"proven", e.proven},
                                  {"violated", e.violated},
                                  {"bound", e.bound}});
    std::ofstream f = aw.open("audit.json");
    f << out.dump(2) << '\n';
    for (auto& item : all.items) res.gates.items.push_back(std::move(item));
}

void run_distill(const ExperimentConfig& cfg, const ArtifactWriter& aw, RunResult& res) {
    const SweepResult sweep = distill_sweep(cfg.distill_q, cfg.distill_r);
    std::ofstream rows = aw.open("distill.csv");
    rows << "q,r,success_prob,error_rate\n";
    for (const auto& row : sweep.rows)
        rows << fmt(row.q) << ',' << fmt(row.r) << ',' << fmt(row.success_prob) << ','
             << fmt(row.error_rate) << '\n';
    std::ofstream slopes = aw.open("distill_slopes.csv");
    slopes << "r,slope,points\n";
    for (const auto& s : sweep.slopes)
        slopes << fmt(s.r) << ',' << fmt(s.slope) << ',' << s.points << '\n';
    res.gates.items.push_back({"distill sweep computed", true, ""});
}

} // namespace

RunResult run_config(const ExperimentConfig& cfg, const std::string& out_dir) {
    RunResult res;
    ArtifactWriter aw{out_dir, config_hash(cfg), cfg.seed, &res.files};

    if (cfg.mode == "distill") {
        run_distill(cfg, aw, res);
        return res;
    }
    if (cfg.mode == "audit") {
        run_audit(cfg, aw, res);
        return res;
    }

    const CssCode reg = make_code(cfg.register_code);
    const std::size_t rounds = cfg.rounds ? cfg.rounds : 3 * cfg.d_t;

    if (cfg.mode == "memory") {
        const Circuit c = build_memory_circuit(reg, rounds, cfg.prep);
        run_sampling_leg(cfg, aw, res, "memory", c, nullptr, nullptr, nullptr, 0);
        return res;
    }

    // Surgery mode: move to a logical basis with support-disjoint measured
    // representatives, then run the injection experiment plus the matched
    // no-surgery baseline (same register and basis, same duration) for the
    // d_cir comparison.
    const CssCode noisy = make_code(cfg.noisy_code);
    const CssCode reg2 = select_measured_basis(reg, cfg.q, cfg.targets);
    BitMatrix alpha(cfg.q, reg2.k());
    for (std::size_t j = 0; j < cfg.q; ++j) alpha.set(j, j, true);
    const InjectionExperiment exp =
        build_injection_experiment(reg2, noisy, cfg.q, alpha, cfg.d_r, cfg.d_t, cfg.prep);

    // Optional positive control: one hidden channel flipping both measured
    // pairs' records at the seam-preparation step, emulating a shared noisy
    // block. X support flips the z-side outcomes; Z support the x-side ones.
    const CssCode comp = make_composite(reg2, noisy, cfg.q);
    BitVector cxs(exp.circuit.num_qubits), czs(exp.circuit.num_qubits);
    for (std::size_t j = 0; j < cfg.q; ++j) {
        const BitVector jx = comp.j_x.row(reg2.k() + j * noisy.k());
        const BitVector jz = comp.j_z.row(reg2.k() + j * noisy.k());
        for (std::size_t i = 0; i < comp.n(); ++i) {
            if (cfg.prep == PauliBasis::z && jx.get(i)) cxs.flip(i);
            if (cfg.prep == PauliBasis::x && jz.get(i)) czs.flip(i);
        }
    }
    run_sampling_leg(cfg, aw, res, "surgery", exp.circuit, &exp, &cxs, &czs,
                     exp.seam_prep_step);

    ExperimentConfig base_cfg = cfg;
    base_cfg.control_p = 0.0;
    base_cfg.seed = cfg.seed + 0x517cc1b727220a95ull; // independent baseline stream
    const Circuit baseline = build_memory_circuit(reg2, rounds, cfg.prep);
    run_sampling_leg(base_cfg, aw, res, "memory", baseline, nullptr, nullptr, nullptr, 0);

    // Idle effective-distance comparison.
    const PowerLawFit *fit_s = nullptr, *fit_m = nullptr;
    for (const auto& [label, fit] : res.fits) {
        if (label == "surgery:idle") fit_s = &fit;
        if (label == "memory:idle") fit_m = &fit;
    }
    std::ofstream cmp = aw.open("comparison.csv");
    cmp << "set,alpha,d_cir,sigma_d,points\n";
    if (fit_s && fit_m) {
        for (const auto* f : {fit_s, fit_m})
            cmp << (f == fit_s ? "surgery:idle" : "memory:idle") << ',' << fmt(f->alpha)
                << ',' << fmt(f->d_cir) << ',' << fmt(f->sigma_d()) << ',' << f->points
                << '\n';
        const double delta = std::fabs(fit_s->d_cir - fit_m->d_cir);
        const double comb = std::sqrt(fit_s->cov[1][1] + fit_m->cov[1][1]);
        cmp << "delta," << fmt(delta) << ',' << fmt(comb) << ",,\n";
        res.gates.items.push_back(
            {"idle d_cir with surgery matches the baseline",
             delta <= 3.0 * comb,
             "delta=" + fmt(delta) + " combined_sigma=" + fmt(comb)});
    } else {
        res.gates.items.push_back({"idle d_cir comparison",
                                   false,
                                   "not enough nonzero points to fit both legs"});
    }
    return res;
}

} // namespace qsurgery
