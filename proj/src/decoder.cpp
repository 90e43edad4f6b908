#include "qsurgery/decoder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace qsurgery {

namespace {

constexpr double kMessageCap = 1e12;

std::vector<double> priors_to_llr(const std::vector<double>& prior) {
    std::vector<double> llr(prior.size());
    for (std::size_t f = 0; f < prior.size(); ++f) {
        const double p = prior[f];
        if (!(p > 0.0) || p > 0.5)
            throw std::invalid_argument("decoder: prior outside (0, 0.5]");
        llr[f] = std::log((1.0 - p) / p);
    }
    return llr;
}

std::size_t lowest_set_bit(const BitVector& v) {
    const auto& w = v.words();
    for (std::size_t i = 0; i < w.size(); ++i)
        if (w[i]) return i * 64 + static_cast<std::size_t>(std::countr_zero(w[i]));
    throw std::logic_error("lowest_set_bit: empty vector");
}

} // namespace

DecodeProblem make_decode_problem(const DetectorModel& dm, PauliBasis side) {
    DecodeProblem pr;
    std::vector<std::uint32_t> det_map(dm.num_detectors, UINT32_MAX);
    for (std::size_t d = 0; d < dm.num_detectors; ++d)
        if (dm.detector_side[d] == side) {
            det_map[d] = static_cast<std::uint32_t>(pr.detector_ids.size());
            pr.detector_ids.push_back(static_cast<std::uint32_t>(d));
        }
    std::vector<std::uint32_t> obs_map(dm.num_observables, UINT32_MAX);
    for (std::size_t o = 0; o < dm.num_observables; ++o)
        if (dm.observable_side[o] == side) {
            obs_map[o] = static_cast<std::uint32_t>(pr.observable_ids.size());
            pr.observable_ids.push_back(static_cast<std::uint32_t>(o));
        }
    pr.num_checks = pr.detector_ids.size();
    pr.num_observables = pr.observable_ids.size();
    pr.syndrome = BitVector(pr.num_checks);

    // Project each visible column; merge equal projections exclusively.
    std::unordered_map<std::string, std::size_t> seen;
    for (const auto& col : dm.columns) {
        if (col.hidden) continue;
        std::vector<std::uint32_t> checks, obs;
        for (auto d : col.detectors)
            if (det_map[d] != UINT32_MAX) checks.push_back(det_map[d]);
        for (auto o : col.observables)
            if (obs_map[o] != UINT32_MAX) obs.push_back(obs_map[o]);
        if (checks.empty() && obs.empty()) continue;

        std::string key;
        key.reserve((checks.size() + obs.size() + 1) * 4);
        for (auto c : checks) key.append(reinterpret_cast<const char*>(&c), 4);
        const std::uint32_t sep = UINT32_MAX;
        key.append(reinterpret_cast<const char*>(&sep), 4);
        for (auto o : obs) key.append(reinterpret_cast<const char*>(&o), 4);

        const auto it = seen.find(key);
        if (it == seen.end()) {
            seen.emplace(std::move(key), pr.prior.size());
            pr.fault_checks.push_back(std::move(checks));
            pr.fault_obs.push_back(std::move(obs));
            pr.prior.push_back(col.p);
        } else {
            pr.prior[it->second] = prob_xor(pr.prior[it->second], col.p);
        }
    }
    return pr;
}

BpResult bp_min_sum(const DecodeProblem& problem, std::size_t max_iter, double scale) {
    const std::size_t nf = problem.num_faults(), nc = problem.num_checks;
    if (problem.syndrome.size() != nc)
        throw std::invalid_argument("bp_min_sum: syndrome size mismatch");
    const std::vector<double> llr = priors_to_llr(problem.prior);

    // Edge arrays: grouped by fault, with a per-check index into them.
    std::vector<std::size_t> var_ptr(nf + 1, 0);
    for (std::size_t f = 0; f < nf; ++f)
        var_ptr[f + 1] = var_ptr[f] + problem.fault_checks[f].size();
    const std::size_t ne = var_ptr[nf];
    std::vector<std::uint32_t> edge_check(ne), edge_fault(ne);
    std::vector<std::size_t> check_ptr(nc + 1, 0), check_eid(ne);
    for (std::size_t f = 0; f < nf; ++f)
        for (std::size_t i = 0; i < problem.fault_checks[f].size(); ++i) {
            const std::size_t e = var_ptr[f] + i;
            edge_check[e] = problem.fault_checks[f][i];
            edge_fault[e] = static_cast<std::uint32_t>(f);
            ++check_ptr[edge_check[e] + 1];
        }
    for (std::size_t c = 0; c < nc; ++c) check_ptr[c + 1] += check_ptr[c];
    {
        std::vector<std::size_t> fill(check_ptr.begin(), check_ptr.end() - 1);
        for (std::size_t e = 0; e < ne; ++e) check_eid[fill[edge_check[e]]++] = e;
    }

    BpResult res;
    res.posterior = llr;
    res.hard = BitVector(nf);
    std::vector<double> m_cv(ne, 0.0), m_vc(ne, 0.0);

    auto syndrome_satisfied = [&]() {
        BitVector acc(nc);
        for (std::size_t f = 0; f < nf; ++f)
            if (res.hard.get(f))
                for (auto c : problem.fault_checks[f]) acc.flip(c);
        acc ^= problem.syndrome;
        return !acc.any();
    };

    if (syndrome_satisfied()) {
        res.converged = true;
        return res;
    }

    for (std::size_t it = 1; it <= max_iter; ++it) {
        for (std::size_t f = 0; f < nf; ++f) {
            double total = llr[f];
            for (std::size_t e = var_ptr[f]; e < var_ptr[f + 1]; ++e) total += m_cv[e];
            for (std::size_t e = var_ptr[f]; e < var_ptr[f + 1]; ++e)
                m_vc[e] = total - m_cv[e];
        }
        for (std::size_t c = 0; c < nc; ++c) {
            double min1 = std::numeric_limits<double>::infinity(), min2 = min1;
            std::size_t arg1 = SIZE_MAX;
            bool sgn = problem.syndrome.get(c);
            for (std::size_t i = check_ptr[c]; i < check_ptr[c + 1]; ++i) {
                const double v = m_vc[check_eid[i]];
                sgn ^= v < 0.0;
                const double mag = std::fabs(v);
                if (mag < min1) {
                    min2 = min1;
                    min1 = mag;
                    arg1 = i;
                } else if (mag < min2) {
                    min2 = mag;
                }
            }
            for (std::size_t i = check_ptr[c]; i < check_ptr[c + 1]; ++i) {
                const std::size_t e = check_eid[i];
                const double mag = std::min(i == arg1 ? min2 : min1, kMessageCap);
                const bool neg = sgn ^ (m_vc[e] < 0.0);
                m_cv[e] = scale * (neg ? -mag : mag);
            }
        }
        for (std::size_t f = 0; f < nf; ++f) {
            double total = llr[f];
            for (std::size_t e = var_ptr[f]; e < var_ptr[f + 1]; ++e) total += m_cv[e];
            res.posterior[f] = total;
            res.hard.set(f, total < 0.0);
        }
        res.iterations = it;
        if (syndrome_satisfied()) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

BitVector osd_cs(const DecodeProblem& problem, const std::vector<double>& posterior,
                 std::size_t order) {
    const std::size_t nf = problem.num_faults(), nc = problem.num_checks;
    if (posterior.size() != nf)
        throw std::invalid_argument("osd_cs: posterior size mismatch");
    if (problem.syndrome.size() != nc)
        throw std::invalid_argument("osd_cs: syndrome size mismatch");
    const std::vector<double> cost = priors_to_llr(problem.prior);

    std::vector<std::uint32_t> sorted(nf);
    std::iota(sorted.begin(), sorted.end(), 0u);
    std::stable_sort(sorted.begin(), sorted.end(), [&](std::uint32_t a, std::uint32_t b) {
        if (posterior[a] != posterior[b]) return posterior[a] < posterior[b];
        return a < b;
    });

    // Greedy elimination in reliability order. Each pivot j keeps its reduced
    // column and the set of original pivot columns it is composed of, so any
    // solve yields a genuine fault selection.
    const std::size_t cap = std::min(nc, nf);
    std::vector<BitVector> vecs, combo;
    std::vector<std::size_t> pivot_row;
    std::vector<std::uint32_t> pivot_fault;
    struct TEntry {
        std::uint32_t fault;
        BitVector usage; // pivot-column combination equal to this column
    };
    std::vector<TEntry> tset;

    for (auto f : sorted) {
        BitVector w(nc), cb(cap);
        for (auto c : problem.fault_checks[f]) w.set(c, true);
        for (std::size_t j = 0; j < vecs.size(); ++j)
            if (w.get(pivot_row[j])) {
                w ^= vecs[j];
                cb ^= combo[j];
            }
        if (w.any()) {
            cb.flip(vecs.size());
            pivot_row.push_back(lowest_set_bit(w));
            vecs.push_back(std::move(w));
            combo.push_back(std::move(cb));
            pivot_fault.push_back(f);
        } else {
            tset.push_back({f, std::move(cb)});
        }
    }

    BitVector residual = problem.syndrome;
    BitVector base(cap);
    for (std::size_t j = 0; j < vecs.size(); ++j)
        if (residual.get(pivot_row[j])) {
            residual ^= vecs[j];
            base ^= combo[j];
        }
    if (residual.any())
        throw SingularSelection("osd_cs: syndrome outside the fault column space");

    auto pivot_cost = [&](const BitVector& usage) {
        double total = 0.0;
        const auto& w = usage.words();
        for (std::size_t i = 0; i < w.size(); ++i)
            for (std::uint64_t bits = w[i]; bits; bits &= bits - 1) {
                const std::size_t j = i * 64 + static_cast<std::size_t>(std::countr_zero(bits));
                total += cost[pivot_fault[j]];
            }
        return total;
    };

    double best_cost = pivot_cost(base);
    BitVector best_usage = base;
    std::size_t best_t1 = SIZE_MAX, best_t2 = SIZE_MAX;

    BitVector u(cap);
    auto consider = [&](std::size_t i1, std::size_t i2, double extra) {
        u = base;
        u ^= tset[i1].usage;
        if (i2 != SIZE_MAX) u ^= tset[i2].usage;
        const double c = pivot_cost(u) + extra;
        if (c < best_cost) {
            best_cost = c;
            best_usage = u;
            best_t1 = i1;
            best_t2 = i2;
        }
    };
    if (order > 0) {
        for (std::size_t i = 0; i < tset.size(); ++i)
            consider(i, SIZE_MAX, cost[tset[i].fault]);
        const std::size_t lim = std::min(order, tset.size());
        for (std::size_t i = 0; i < lim; ++i)
            for (std::size_t j = i + 1; j < lim; ++j)
                consider(i, j, cost[tset[i].fault] + cost[tset[j].fault]);
    }

    BitVector out(nf);
    const auto& w = best_usage.words();
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::uint64_t bits = w[i]; bits; bits &= bits - 1) {
            const std::size_t j = i * 64 + static_cast<std::size_t>(std::countr_zero(bits));
            out.flip(pivot_fault[j]);
        }
    if (best_t1 != SIZE_MAX) out.flip(tset[best_t1].fault);
    if (best_t2 != SIZE_MAX) out.flip(tset[best_t2].fault);
    return out;
}

BitVector decode_syndrome(const DecodeProblem& problem, const DecodeOptions& opts) {
    const BpResult bp = bp_min_sum(problem, opts.max_iter, opts.scale);
    if (bp.converged) return bp.hard;
    return osd_cs(problem, bp.posterior, opts.osd_order);
}

DecodeReport decode_shots(const DetectorModel& dm, const ShotBatch& batch,
                          const DecodeOptions& opts) {
    if (batch.num_detectors != dm.num_detectors ||
        batch.num_observables != dm.num_observables)
        throw std::invalid_argument("decode_shots: batch does not match the model");

    DecodeReport rep;
    rep.shots = batch.shots;
    rep.num_observables = dm.num_observables;
    rep.err.assign(batch.shots * rep.obs_words(), 0);
    rep.covered.assign(dm.num_observables, 0);
    std::vector<std::size_t> failures(dm.num_observables, 0);

    for (PauliBasis side : {PauliBasis::x, PauliBasis::z}) {
        DecodeProblem pr = make_decode_problem(dm, side);
        if (pr.num_observables == 0) continue;
        for (auto o : pr.observable_ids) rep.covered[o] = 1;
        std::vector<std::uint8_t> predicted(pr.num_observables);

        for (std::size_t s = 0; s < batch.shots; ++s) {
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
                const bool err =
                    failed_shot || (predicted[o] != batch.obs_bit(s, oc));
                if (err) {
                    rep.err[s * rep.obs_words() + oc / 64] |= 1ull << (oc % 64);
                    ++failures[oc];
                }
            }
        }
    }

    for (std::size_t o = 0; o < dm.num_observables; ++o) {
        if (!rep.covered[o]) continue;
        ObservableStats st;
        st.observable = static_cast<std::uint32_t>(o);
        st.name = dm.observable_names[o];
        st.shots = batch.shots;
        st.failures = failures[o];
        st.p_l = batch.shots ? static_cast<double>(failures[o]) /
                                   static_cast<double>(batch.shots)
                             : 0.0;
        st.sigma = batch.shots ? std::sqrt(st.p_l * (1.0 - st.p_l) /
                                           static_cast<double>(batch.shots))
                               : 0.0;
        rep.stats.push_back(std::move(st));
    }
    return rep;
}

} // namespace qsurgery
