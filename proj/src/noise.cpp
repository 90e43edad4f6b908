#include "qsurgery/noise.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace qsurgery {

NoisyCircuit apply_noise(const Circuit& c, const NoiseModel& model) {
    if (!(model.p >= 0.0) || model.p > 0.5)
        throw std::invalid_argument("apply_noise: p must lie in [0, 0.5]");
    NoisyCircuit nc;
    nc.circuit = c;
    nc.model = model;
    std::size_t rec = 0;
    for (std::size_t s = 0; s < c.steps.size(); ++s) {
        for (const auto& op : c.steps[s].ops) {
            Channel ch;
            ch.p = model.p;
            ch.step = s;
            switch (op.kind) {
            case OpKind::prep:
                ch.kind = ChannelKind::prep_flip;
                ch.a = op.a;
                ch.prep_basis = op.basis;
                break;
            case OpKind::cx:
                ch.kind = ChannelKind::depol2;
                ch.a = op.a;
                ch.b = op.b;
                break;
            case OpKind::idle:
                ch.kind = ChannelKind::depol1;
                ch.a = op.a;
                break;
            case OpKind::meas:
            case OpKind::meas_virtual:
                ch.kind = ChannelKind::meas_flip;
                ch.a = op.a;
                ch.meas = static_cast<std::uint32_t>(rec++);
                break;
            }
            nc.channels.push_back(std::move(ch));
        }
    }
    if (rec != c.num_measurements())
        throw std::invalid_argument("apply_noise: measurement records out of order");
    return nc;
}

void add_pauli_channel(NoisyCircuit& nc, std::size_t step, const BitVector& xs,
                       const BitVector& zs, double p, bool hidden) {
    if (xs.size() != nc.circuit.num_qubits || zs.size() != nc.circuit.num_qubits)
        throw std::invalid_argument("add_pauli_channel: support size mismatch");
    if (step >= nc.circuit.steps.size())
        throw std::invalid_argument("add_pauli_channel: step out of range");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("add_pauli_channel: bad p");
    Channel ch;
    ch.kind = ChannelKind::pauli_string;
    ch.p = p;
    ch.step = step;
    ch.hidden = hidden;
    ch.xs = xs;
    ch.zs = zs;
    nc.channels.push_back(std::move(ch));
}

std::vector<ElementaryFault> elementary_faults(const NoisyCircuit& nc) {
    const std::size_t n = nc.circuit.num_qubits;
    std::vector<ElementaryFault> out;
    auto pauli = [&](std::uint32_t ch, double p, std::initializer_list<std::uint32_t> xq,
                     std::initializer_list<std::uint32_t> zq) {
        ElementaryFault f;
        f.channel = ch;
        f.p = p;
        f.xs = BitVector(n);
        f.zs = BitVector(n);
        for (auto q : xq) f.xs.set(q, true);
        for (auto q : zq) f.zs.set(q, true);
        out.push_back(std::move(f));
    };
    for (std::size_t ci = 0; ci < nc.channels.size(); ++ci) {
        const Channel& ch = nc.channels[ci];
        const auto c32 = static_cast<std::uint32_t>(ci);
        switch (ch.kind) {
        case ChannelKind::prep_flip: {
            // Depolarizing noise right after a basis preparation reduces to a
            // single flip of the anticommuting Pauli with probability 2p/3.
            const double pf = 2.0 * ch.p / 3.0;
            if (pf <= 0.0) break;
            if (ch.prep_basis == PauliBasis::z)
                pauli(c32, pf, {ch.a}, {});
            else
                pauli(c32, pf, {}, {ch.a});
            break;
        }
        case ChannelKind::depol1: {
            const double a1 = depol1_binary(ch.p);
            if (a1 <= 0.0) break;
            pauli(c32, a1, {ch.a}, {});
            pauli(c32, a1, {ch.a}, {ch.a});
            pauli(c32, a1, {}, {ch.a});
            break;
        }
        case ChannelKind::depol2: {
            const double a2 = depol2_binary(ch.p);
            if (a2 <= 0.0) break;
            for (int pa = 0; pa < 4; ++pa)
                for (int pb = 0; pb < 4; ++pb) {
                    if (pa == 0 && pb == 0) continue;
                    ElementaryFault f;
                    f.channel = c32;
                    f.p = a2;
                    f.xs = BitVector(n);
                    f.zs = BitVector(n);
                    if (pa & 1) f.xs.set(ch.a, true);
                    if (pa & 2) f.zs.set(ch.a, true);
                    if (pb & 1) f.xs.set(ch.b, true);
                    if (pb & 2) f.zs.set(ch.b, true);
                    out.push_back(std::move(f));
                }
            break;
        }
        case ChannelKind::meas_flip: {
            const double pf = 2.0 * ch.p / 3.0;
            if (pf <= 0.0) break;
            ElementaryFault f;
            f.channel = c32;
            f.p = pf;
            f.xs = BitVector(n);
            f.zs = BitVector(n);
            f.flip_meas = ch.meas;
            out.push_back(std::move(f));
            break;
        }
        case ChannelKind::pauli_string: {
            if (ch.p <= 0.0) break;
            ElementaryFault f;
            f.channel = c32;
            f.p = ch.p;
            f.xs = ch.xs;
            f.zs = ch.zs;
            out.push_back(std::move(f));
            break;
        }
        }
    }
    return out;
}

DetectorModel derive_detector_model(const NoisyCircuit& nc) {
    const Circuit& c = nc.circuit;
    DetectorModel dm;
    dm.num_detectors = c.detectors.size();
    dm.num_observables = c.observables.size();
    dm.detector_side.reserve(dm.num_detectors);
    for (const auto& d : c.detectors) dm.detector_side.push_back(d.side);
    for (const auto& o : c.observables) {
        dm.observable_side.push_back(o.side);
        dm.observable_names.push_back(o.name);
    }
    dm.elementary = elementary_faults(nc);
    dm.elementary_column.assign(dm.elementary.size(), UINT32_MAX);

    const std::size_t nq = c.num_qubits;
    const std::size_t nm = c.num_measurements();
    std::vector<std::uint64_t> fx(nq), fz(nq), recflip(nm);
    std::vector<std::uint64_t> detw(dm.num_detectors), obsw(dm.num_observables);
    std::unordered_map<std::string, std::uint32_t> column_of;

    for (std::size_t b0 = 0; b0 < dm.elementary.size(); b0 += 64) {
        const std::size_t lanes = std::min<std::size_t>(64, dm.elementary.size() - b0);
        std::fill(fx.begin(), fx.end(), 0ull);
        std::fill(fz.begin(), fz.end(), 0ull);
        std::fill(recflip.begin(), recflip.end(), 0ull);

        std::size_t rec = 0;
        for (std::size_t s = 0; s < c.steps.size(); ++s) {
            for (const auto& op : c.steps[s].ops) {
                switch (op.kind) {
                case OpKind::prep:
                    fx[op.a] = 0;
                    fz[op.a] = 0;
                    break;
                case OpKind::cx:
                    fx[op.b] ^= fx[op.a];
                    fz[op.a] ^= fz[op.b];
                    break;
                case OpKind::meas:
                case OpKind::meas_virtual:
                    recflip[rec++] = op.basis == PauliBasis::z ? fx[op.a] : fz[op.a];
                    break;
                case OpKind::idle:
                    break;
                }
            }
            for (std::size_t l = 0; l < lanes; ++l) {
                const ElementaryFault& f = dm.elementary[b0 + l];
                if (nc.channels[f.channel].step != s) continue;
                const std::uint64_t bit = 1ull << l;
                for (std::size_t q = 0; q < nq; ++q) {
                    if (f.xs.get(q)) fx[q] ^= bit;
                    if (f.zs.get(q)) fz[q] ^= bit;
                }
            }
        }
        for (std::size_t l = 0; l < lanes; ++l) {
            const ElementaryFault& f = dm.elementary[b0 + l];
            if (f.flip_meas != UINT32_MAX) recflip[f.flip_meas] ^= 1ull << l;
        }

        for (std::size_t d = 0; d < dm.num_detectors; ++d) {
            std::uint64_t w = 0;
            for (auto m : c.detectors[d].meas) w ^= recflip[m];
            detw[d] = w;
        }
        for (std::size_t o = 0; o < dm.num_observables; ++o) {
            std::uint64_t w = 0;
            for (auto m : c.observables[o].meas) w ^= recflip[m];
            obsw[o] = w;
        }

        for (std::size_t l = 0; l < lanes; ++l) {
            const ElementaryFault& f = dm.elementary[b0 + l];
            const bool hidden = nc.channels[f.channel].hidden;
            std::vector<std::uint32_t> dets, obs;
            for (std::size_t d = 0; d < dm.num_detectors; ++d)
                if ((detw[d] >> l) & 1) dets.push_back(static_cast<std::uint32_t>(d));
            for (std::size_t o = 0; o < dm.num_observables; ++o)
                if ((obsw[o] >> l) & 1) obs.push_back(static_cast<std::uint32_t>(o));
            if (dets.empty() && obs.empty()) continue;

            std::string key;
            key.reserve((dets.size() + obs.size()) * 4 + 2);
            auto put = [&key](std::uint32_t v) {
                key.append(reinterpret_cast<const char*>(&v), 4);
            };
            for (auto d : dets) put(d);
            put(UINT32_MAX);
            for (auto o : obs) put(o);
            key.push_back(hidden ? '\1' : '\0');

            auto [it, inserted] =
                column_of.try_emplace(key, static_cast<std::uint32_t>(dm.columns.size()));
            if (inserted) {
                FaultColumn col;
                col.detectors = std::move(dets);
                col.observables = std::move(obs);
                col.p = f.p;
                col.hidden = hidden;
                dm.columns.push_back(std::move(col));
            } else {
                dm.columns[it->second].p = prob_xor(dm.columns[it->second].p, f.p);
            }
            dm.elementary_column[b0 + l] = it->second;
        }
    }
    return dm;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace {

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

struct SplitMix {
    std::uint64_t s;
    std::uint64_t next() {
        s += 0x9E3779B97F4A7C15ull;
        return mix64(s);
    }
    // Uniform in (0, 1].
    double next_unit() {
        return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    }
};

inline SplitMix stream_for(std::uint64_t seed, std::uint64_t shot, std::uint64_t cls) {
    std::uint64_t h = mix64(seed ^ 0xA0761D6478BD642Full);
    h = mix64(h ^ (shot + 0x8BB84B93962EACC9ull));
    h = mix64(h ^ (cls + 0x2D358DCCAA6C78A5ull));
    return SplitMix{h};
}

} // namespace

ShotBatch sample_model(const DetectorModel& dm, std::size_t shots, std::uint64_t seed,
                       const SampleOptions& opts) {
    ShotBatch batch;
    batch.shots = shots;
    batch.num_detectors = dm.num_detectors;
    batch.num_observables = dm.num_observables;
    batch.det_words = (dm.num_detectors + 63) / 64;
    batch.obs_words = (dm.num_observables + 63) / 64;
    batch.det.assign(shots * batch.det_words, 0);
    batch.obs.assign(shots * batch.obs_words, 0);
    if (opts.record_faults) batch.fault_columns.resize(shots);

    // Group columns into probability classes for geometric skipping.
    std::map<double, std::vector<std::uint32_t>> classes;
    for (std::uint32_t cidx = 0; cidx < dm.columns.size(); ++cidx) {
        const double p = dm.columns[cidx].p;
        if (p <= 0.0) continue;
        if (p >= 1.0) throw std::invalid_argument("sample_model: column probability >= 1");
        classes[p].push_back(cidx);
    }

    for (std::size_t shot = 0; shot < shots; ++shot) {
        std::uint64_t* dw = batch.det.data() + shot * batch.det_words;
        std::uint64_t* ow = batch.obs.data() + shot * batch.obs_words;
        std::uint64_t cls_id = 0;
        for (const auto& [p, members] : classes) {
            SplitMix rng = stream_for(seed, shot, cls_id++);
            const double log1mp = std::log1p(-p);
            std::size_t pos = 0;
            while (true) {
                const double u = rng.next_unit();
                const double skip = std::log(u) / log1mp;
                if (skip >= static_cast<double>(members.size())) break;
                pos += static_cast<std::size_t>(skip) + 1;
                if (pos > members.size()) break;
                const FaultColumn& col = dm.columns[members[pos - 1]];
                for (auto d : col.detectors) dw[d / 64] ^= 1ull << (d % 64);
                for (auto o : col.observables) ow[o / 64] ^= 1ull << (o % 64);
                if (opts.record_faults) batch.fault_columns[shot].push_back(members[pos - 1]);
            }
        }
        if (opts.record_faults)
            std::sort(batch.fault_columns[shot].begin(), batch.fault_columns[shot].end());
    }
    return batch;
}

} // namespace qsurgery
