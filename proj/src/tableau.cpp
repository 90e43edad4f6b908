#include "qsurgery/tableau.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <stdexcept>
#include <string>

namespace qsurgery {

SignForm& SignForm::operator^=(const SignForm& o) {
    c ^= o.c;
    if (vars.size() == 0) {
        vars = o.vars;
    } else if (o.vars.size() != 0) {
        if (vars.size() != o.vars.size())
            throw std::logic_error("SignForm: mixing variable spaces");
        vars ^= o.vars;
    }
    return *this;
}

SymbolicTableau::SymbolicTableau(std::size_t n, std::size_t var_capacity)
    : n_(n), cap_(var_capacity), wn_((n + 63) / 64), wv_((var_capacity + 63) / 64) {
    const std::size_t rows = 2 * n_ + 1; // scratch row at index 2n
    xs_.assign(rows * wn_, 0);
    zs_.assign(rows * wn_, 0);
    rv_.assign(rows * wv_, 0);
    rc_.assign(rows, 0);
    for (std::size_t i = 0; i < n_; ++i) {
        xs_[i * wn_ + i / 64] |= 1ull << (i % 64);          // destabilizer X_i
        zs_[(n_ + i) * wn_ + i / 64] |= 1ull << (i % 64);   // stabilizer Z_i
    }
}

bool SymbolicTableau::parity_and(const std::uint64_t* a, const std::uint64_t* b) const {
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < wn_; ++w) acc ^= a[w] & b[w];
    return std::popcount(acc) & 1;
}

void SymbolicTableau::rowmult(std::size_t dst, std::size_t src) {
    // row dst := row src * row dst; reordering Z^{z_src} past X^{x_dst}
    // costs (-1)^|z_src & x_dst|.
    rc_[dst] ^= rc_[src] ^ static_cast<std::uint8_t>(
                               parity_and(&zs_[src * wn_], &xs_[dst * wn_]));
    for (std::size_t w = 0; w < wv_; ++w) rv_[dst * wv_ + w] ^= rv_[src * wv_ + w];
    for (std::size_t w = 0; w < wn_; ++w) {
        xs_[dst * wn_ + w] ^= xs_[src * wn_ + w];
        zs_[dst * wn_ + w] ^= zs_[src * wn_ + w];
    }
}

void SymbolicTableau::row_clear(std::size_t r) {
    std::fill_n(xs_.begin() + static_cast<std::ptrdiff_t>(r * wn_), wn_, 0ull);
    std::fill_n(zs_.begin() + static_cast<std::ptrdiff_t>(r * wn_), wn_, 0ull);
    std::fill_n(rv_.begin() + static_cast<std::ptrdiff_t>(r * wv_), wv_, 0ull);
    rc_[r] = 0;
}

void SymbolicTableau::row_copy(std::size_t dst, std::size_t src) {
    std::copy_n(xs_.begin() + static_cast<std::ptrdiff_t>(src * wn_), wn_,
                xs_.begin() + static_cast<std::ptrdiff_t>(dst * wn_));
    std::copy_n(zs_.begin() + static_cast<std::ptrdiff_t>(src * wn_), wn_,
                zs_.begin() + static_cast<std::ptrdiff_t>(dst * wn_));
    std::copy_n(rv_.begin() + static_cast<std::ptrdiff_t>(src * wv_), wv_,
                rv_.begin() + static_cast<std::ptrdiff_t>(dst * wv_));
    rc_[dst] = rc_[src];
}

std::size_t SymbolicTableau::mint() {
    if (minted_ >= cap_) throw std::logic_error("SymbolicTableau: variable capacity exceeded");
    return minted_++;
}

void SymbolicTableau::h(std::size_t q) {
    if (q >= n_) throw std::invalid_argument("h: qubit out of range");
    const std::size_t w = q / 64;
    const std::uint64_t m = 1ull << (q % 64);
    for (std::size_t r = 0; r < 2 * n_; ++r) {
        std::uint64_t& x = xs_[r * wn_ + w];
        std::uint64_t& z = zs_[r * wn_ + w];
        rc_[r] ^= static_cast<std::uint8_t>((x & z & m) != 0);
        const std::uint64_t diff = (x ^ z) & m;
        x ^= diff;
        z ^= diff;
    }
}

void SymbolicTableau::cx(std::size_t c, std::size_t t) {
    if (c >= n_ || t >= n_ || c == t) throw std::invalid_argument("cx: bad qubits");
    const std::size_t wc = c / 64, wt = t / 64;
    const std::uint64_t mc = 1ull << (c % 64), mt = 1ull << (t % 64);
    for (std::size_t r = 0; r < 2 * n_; ++r) {
        // X_c -> X_c X_t, Z_t -> Z_c Z_t; no sign in the strict XZ convention.
        if (xs_[r * wn_ + wc] & mc) xs_[r * wn_ + wt] ^= mt;
        if (zs_[r * wn_ + wt] & mt) zs_[r * wn_ + wc] ^= mc;
    }
}

void SymbolicTableau::apply_pauli(const BitVector& xe, const BitVector& ze) {
    if (xe.size() != n_ || ze.size() != n_)
        throw std::invalid_argument("apply_pauli: size mismatch");
    const std::uint64_t* xw = xe.words().data();
    const std::uint64_t* zw = ze.words().data();
    for (std::size_t r = 0; r < 2 * n_; ++r) {
        const bool anti = parity_and(&xs_[r * wn_], zw) ^ parity_and(&zs_[r * wn_], xw);
        rc_[r] ^= static_cast<std::uint8_t>(anti);
    }
}

SignForm SymbolicTableau::measure_z(std::size_t q) {
    if (q >= n_) throw std::invalid_argument("measure_z: qubit out of range");
    const std::size_t w = q / 64;
    const std::uint64_t m = 1ull << (q % 64);

    std::size_t p = 2 * n_;
    for (std::size_t r = n_; r < 2 * n_; ++r)
        if (xs_[r * wn_ + w] & m) {
            p = r;
            break;
        }

    SignForm out;
    out.vars = BitVector(cap_);
    if (p < 2 * n_) { // random outcome
        for (std::size_t r = 0; r < 2 * n_; ++r)
            if (r != p && (xs_[r * wn_ + w] & m)) rowmult(r, p);
        row_copy(p - n_, p);
        row_clear(p);
        zs_[p * wn_ + w] |= m;
        const std::size_t v = mint();
        rv_[p * wv_ + v / 64] |= 1ull << (v % 64);
        out.vars.set(v, true);
        return out;
    }

    // Deterministic: accumulate the stabilizer product that equals +-Z_q.
    const std::size_t scratch = 2 * n_;
    row_clear(scratch);
    for (std::size_t i = 0; i < n_; ++i)
        if (xs_[i * wn_ + w] & m) rowmult(scratch, n_ + i);
    for (std::size_t ww = 0; ww < wn_; ++ww) {
        const std::uint64_t want_z = ww == w ? m : 0ull;
        if (xs_[scratch * wn_ + ww] != 0 || zs_[scratch * wn_ + ww] != want_z)
            throw std::logic_error("measure_z: stabilizer product mismatch");
    }
    out.c = rc_[scratch] != 0;
    std::copy_n(rv_.begin() + static_cast<std::ptrdiff_t>(scratch * wv_), wv_,
                out.vars.words().data());
    return out;
}

SignForm SymbolicTableau::measure_x(std::size_t q) {
    h(q);
    SignForm f = measure_z(q);
    h(q);
    return f;
}

void SymbolicTableau::prep_z(std::size_t q) {
    const SignForm f = measure_z(q);
    if (!f.c && !f.vars.any()) return;
    // Conditional X_q resets the outcome to 0: flip every row with z_q set.
    const std::size_t w = q / 64;
    const std::uint64_t m = 1ull << (q % 64);
    const std::uint64_t* fv = f.vars.words().data();
    for (std::size_t r = 0; r < 2 * n_; ++r)
        if (zs_[r * wn_ + w] & m) {
            rc_[r] ^= static_cast<std::uint8_t>(f.c);
            for (std::size_t ww = 0; ww < wv_; ++ww) rv_[r * wv_ + ww] ^= fv[ww];
        }
}

void SymbolicTableau::prep_x(std::size_t q) {
    const SignForm f = measure_x(q);
    if (!f.c && !f.vars.any()) return;
    const std::size_t w = q / 64;
    const std::uint64_t m = 1ull << (q % 64);
    const std::uint64_t* fv = f.vars.words().data();
    for (std::size_t r = 0; r < 2 * n_; ++r)
        if (xs_[r * wn_ + w] & m) {
            rc_[r] ^= static_cast<std::uint8_t>(f.c);
            for (std::size_t ww = 0; ww < wv_; ++ww) rv_[r * wv_ + ww] ^= fv[ww];
        }
}

SymbolicTableau::VirtualResult SymbolicTableau::measure_pauli_virtual(const BitVector& xq,
                                                                      const BitVector& zq) {
    if (xq.size() != n_ || zq.size() != n_)
        throw std::invalid_argument("measure_pauli_virtual: size mismatch");
    VirtualResult res;
    const std::size_t scratch = 2 * n_;
    row_clear(scratch);
    const std::uint64_t* xw = xq.words().data();
    const std::uint64_t* zw = zq.words().data();
    for (std::size_t i = 0; i < n_; ++i) {
        const bool anti = parity_and(&xs_[i * wn_], zw) ^ parity_and(&zs_[i * wn_], xw);
        if (anti) rowmult(scratch, n_ + i);
    }
    bool match = true;
    for (std::size_t w = 0; w < wn_ && match; ++w)
        match = xs_[scratch * wn_ + w] == xw[w] && zs_[scratch * wn_ + w] == zw[w];
    res.form.vars = BitVector(cap_);
    if (match) {
        res.in_group = true;
        res.form.c = rc_[scratch] != 0;
        std::copy_n(rv_.begin() + static_cast<std::ptrdiff_t>(scratch * wv_), wv_,
                    res.form.vars.words().data());
    } else {
        res.in_group = false;
        res.form.vars.set(mint(), true); // independent fresh randomness
    }
    return res;
}

// ---------------------------------------------------------------------------
// Circuit-level analysis
// ---------------------------------------------------------------------------

ReferenceForms analyze_forms(const Circuit& c, const std::vector<PauliFault>& faults) {
    std::size_t preps = 0;
    for (const auto& st : c.steps)
        for (const auto& op : st.ops)
            if (op.kind == OpKind::prep) ++preps;
    const std::size_t cap =
        preps + c.num_measurements() + c.detectors.size() + c.observables.size() + 1;

    SymbolicTableau t(c.num_qubits, cap);
    std::vector<SignForm> real_form(c.num_measurements());
    std::vector<std::uint8_t> is_real(c.num_measurements(), 0);
    std::size_t rec = 0;
    bool saw_virtual = false;

    for (std::size_t s = 0; s < c.steps.size(); ++s) {
        for (const auto& op : c.steps[s].ops) {
            if (saw_virtual && op.kind != OpKind::meas_virtual && op.kind != OpKind::idle)
                throw std::invalid_argument("analyze_forms: virtual readouts must be final");
            switch (op.kind) {
            case OpKind::prep:
                if (op.basis == PauliBasis::z)
                    t.prep_z(op.a);
                else
                    t.prep_x(op.a);
                break;
            case OpKind::cx:
                t.cx(op.a, op.b);
                break;
            case OpKind::meas:
                real_form[rec] = op.basis == PauliBasis::z ? t.measure_z(op.a)
                                                           : t.measure_x(op.a);
                is_real[rec] = 1;
                ++rec;
                break;
            case OpKind::meas_virtual:
                saw_virtual = true;
                ++rec; // evaluated jointly per detector/observable below
                break;
            case OpKind::idle:
                break;
            }
        }
        for (const auto& f : faults)
            if (f.after_step == s) t.apply_pauli(f.xs, f.zs);
    }
    if (rec != c.num_measurements())
        throw std::invalid_argument("analyze_forms: measurement record mismatch");

    auto evaluate = [&](const std::vector<std::uint32_t>& meas) {
        SignForm f;
        f.vars = BitVector(cap);
        BitVector xq(c.num_qubits), zq(c.num_qubits);
        bool has_virtual = false;
        for (auto m : meas) {
            if (is_real[m]) {
                f ^= real_form[m];
            } else {
                has_virtual = true;
                if (c.meas_basis[m] == PauliBasis::x)
                    xq.flip(c.meas_qubit[m]);
                else
                    zq.flip(c.meas_qubit[m]);
            }
        }
        if (has_virtual) {
            const auto vr = t.measure_pauli_virtual(xq, zq);
            f ^= vr.form;
        }
        return f;
    };

    ReferenceForms out;
    out.detectors.reserve(c.detectors.size());
    for (const auto& d : c.detectors) out.detectors.push_back(evaluate(d.meas));
    out.observables.reserve(c.observables.size());
    for (const auto& o : c.observables) out.observables.push_back(evaluate(o.meas));
    return out;
}

CircuitReference analyze_reference(const Circuit& c) {
    const ReferenceForms forms = analyze_forms(c);
    CircuitReference ref;
    ref.detector_deterministic.reserve(forms.detectors.size());
    ref.detector_value.reserve(forms.detectors.size());
    for (const auto& f : forms.detectors) {
        ref.detector_deterministic.push_back(f.deterministic() ? 1 : 0);
        ref.detector_value.push_back(f.c ? 1 : 0);
    }
    ref.observable_deterministic.reserve(forms.observables.size());
    ref.observable_value.reserve(forms.observables.size());
    for (const auto& f : forms.observables) {
        ref.observable_deterministic.push_back(f.deterministic() ? 1 : 0);
        ref.observable_value.push_back(f.c ? 1 : 0);
    }
    return ref;
}

Report validate_circuit(const Circuit& c) {
    Report rep;
    const auto issues = check_circuit_invariants(c);
    std::string joined;
    for (const auto& s : issues) joined += (joined.empty() ? "" : "; ") + s;
    rep.items.push_back({"structural invariants", issues.empty(), joined});

    const CircuitReference ref = analyze_reference(c);
    std::size_t nondet = 0, nonzero = 0;
    for (std::size_t d = 0; d < ref.detector_deterministic.size(); ++d) {
        if (!ref.detector_deterministic[d]) ++nondet;
        else if (ref.detector_value[d]) ++nonzero;
    }
    rep.items.push_back({"detectors deterministic", nondet == 0,
                         nondet ? std::to_string(nondet) + " random detectors" : ""});
    rep.items.push_back({"detector references zero", nonzero == 0,
                         nonzero ? std::to_string(nonzero) + " detectors reference 1" : ""});

    // Observables on the data-preparation side must have fixed references;
    // the opposite side's are genuinely random and carry no reference value.
    PauliBasis prep_side = PauliBasis::z;
    if (!c.steps.empty())
        for (const auto& op : c.steps.front().ops)
            if (op.kind == OpKind::prep) {
                prep_side = op.basis;
                break;
            }
    std::size_t bad_obs = 0;
    for (std::size_t o = 0; o < c.observables.size(); ++o)
        if (c.observables[o].side == prep_side &&
            (!ref.observable_deterministic[o] || ref.observable_value[o]))
            ++bad_obs;
    rep.items.push_back({"prep-side observables deterministic zero", bad_obs == 0,
                         bad_obs ? std::to_string(bad_obs) + " bad observables" : ""});
    return rep;
}

FaultSignature fault_signature_tableau(const Circuit& c, const PauliFault& fault) {
    const ReferenceForms clean = analyze_forms(c);
    const ReferenceForms dirty = analyze_forms(c, {fault});
    FaultSignature sig;
    sig.detectors = BitVector(c.detectors.size());
    sig.observables = BitVector(c.observables.size());
    for (std::size_t d = 0; d < c.detectors.size(); ++d) {
        SignForm diff = clean.detectors[d];
        diff ^= dirty.detectors[d];
        if (diff.vars.any())
            throw std::logic_error("fault_signature_tableau: randomness mismatch (detector)");
        sig.detectors.set(d, diff.c);
    }
    for (std::size_t o = 0; o < c.observables.size(); ++o) {
        SignForm diff = clean.observables[o];
        diff ^= dirty.observables[o];
        if (diff.vars.any())
            throw std::logic_error("fault_signature_tableau: randomness mismatch (observable)");
        sig.observables.set(o, diff.c);
    }
    return sig;
}

} // namespace qsurgery
