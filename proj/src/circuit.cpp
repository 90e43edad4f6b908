#include "qsurgery/circuit.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qsurgery {

// ---------------------------------------------------------------------------
// CircuitBuilder
// ---------------------------------------------------------------------------

CircuitBuilder::CircuitBuilder(std::uint32_t num_qubits) {
    c_.num_qubits = num_qubits;
    active_.assign(num_qubits, 0);
    touched_.assign(num_qubits, 0);
}

void CircuitBuilder::activate(std::uint32_t q) {
    if (q >= c_.num_qubits) throw std::invalid_argument("activate: qubit out of range");
    active_[q] = 1;
}

void CircuitBuilder::begin_step() {
    if (in_step_) throw std::logic_error("begin_step: previous step not committed");
    c_.steps.emplace_back();
    std::fill(touched_.begin(), touched_.end(), std::uint8_t{0});
    in_step_ = true;
}

void CircuitBuilder::touch(std::uint32_t q) {
    if (!in_step_) throw std::logic_error("operation outside begin_step/end_step");
    if (q >= c_.num_qubits) throw std::invalid_argument("operation: qubit out of range");
    if (touched_[q])
        throw std::logic_error("qubit " + std::to_string(q) + " used twice in one timestep");
    touched_[q] = 1;
}

void CircuitBuilder::prep(std::uint32_t q, PauliBasis basis) {
    touch(q);
    active_[q] = 1;
    c_.steps.back().ops.push_back({OpKind::prep, basis, q, 0});
}

void CircuitBuilder::cx(std::uint32_t c, std::uint32_t t) {
    if (c == t) throw std::invalid_argument("cx: control equals target");
    if (c >= c_.num_qubits || t >= c_.num_qubits)
        throw std::invalid_argument("cx: qubit out of range");
    if (!active_[c] || !active_[t]) throw std::logic_error("cx on inactive qubit");
    touch(c);
    touch(t);
    c_.steps.back().ops.push_back({OpKind::cx, PauliBasis::z, c, t});
}

std::uint32_t CircuitBuilder::meas(std::uint32_t q, PauliBasis basis, bool deactivate) {
    if (q >= c_.num_qubits) throw std::invalid_argument("meas: qubit out of range");
    if (!active_[q]) throw std::logic_error("meas on inactive qubit");
    touch(q);
    const auto rec = static_cast<std::uint32_t>(c_.meas_qubit.size());
    c_.steps.back().ops.push_back({OpKind::meas, basis, q, deactivate ? 1u : 0u});
    c_.meas_qubit.push_back(q);
    c_.meas_basis.push_back(basis);
    c_.meas_is_virtual.push_back(0);
    c_.meas_step.push_back(static_cast<std::uint32_t>(c_.steps.size() - 1));
    if (deactivate) active_[q] = 0;
    return rec;
}

std::uint32_t CircuitBuilder::meas_virtual(std::uint32_t q, PauliBasis basis) {
    if (q >= c_.num_qubits) throw std::invalid_argument("meas_virtual: qubit out of range");
    if (!active_[q]) throw std::logic_error("meas_virtual on inactive qubit");
    touch(q);
    const auto rec = static_cast<std::uint32_t>(c_.meas_qubit.size());
    c_.steps.back().ops.push_back({OpKind::meas_virtual, basis, q, 0});
    c_.meas_qubit.push_back(q);
    c_.meas_basis.push_back(basis);
    c_.meas_is_virtual.push_back(1);
    c_.meas_step.push_back(static_cast<std::uint32_t>(c_.steps.size() - 1));
    return rec;
}

void CircuitBuilder::end_step() {
    if (!in_step_) throw std::logic_error("end_step without begin_step");
    auto& ops = c_.steps.back().ops;
    // Virtual-readout steps take no physical time: no idles are inserted.
    bool virtual_only = !ops.empty();
    for (const auto& op : ops) virtual_only = virtual_only && op.kind == OpKind::meas_virtual;
    if (!virtual_only) {
        for (std::uint32_t q = 0; q < c_.num_qubits; ++q)
            if (active_[q] && !touched_[q]) ops.push_back({OpKind::idle, PauliBasis::z, q, 0});
    }
    in_step_ = false;
}

std::uint32_t CircuitBuilder::add_detector(PauliBasis side, std::vector<std::uint32_t> meas) {
    for (auto m : meas)
        if (m >= c_.meas_qubit.size())
            throw std::invalid_argument("add_detector: record index out of range");
    c_.detectors.push_back({side, std::move(meas)});
    return static_cast<std::uint32_t>(c_.detectors.size() - 1);
}

std::size_t CircuitBuilder::add_observable(std::string name, PauliBasis side,
                                           std::vector<std::uint32_t> meas) {
    for (auto m : meas)
        if (m >= c_.meas_qubit.size())
            throw std::invalid_argument("add_observable: record index out of range");
    c_.observables.push_back({std::move(name), side, std::move(meas)});
    return c_.observables.size() - 1;
}

Circuit CircuitBuilder::take() {
    if (in_step_) throw std::logic_error("take: step still open");
    return std::move(c_);
}

// ---------------------------------------------------------------------------
// Tanner-graph edge coloring
// ---------------------------------------------------------------------------

namespace {

// Colors one side's Tanner graph with exactly max-degree colors (Koenig's
// construction on bipartite graphs) and appends its edges to sched, shifting
// colors by offset. Returns the number of colors used.
std::size_t color_side(const BitMatrix& check, PauliBasis side, std::size_t offset,
                       ParitySchedule& sched) {
    const std::size_t rows = check.rows(), n = check.cols();
    struct Ends {
        std::size_t u, w; // u: check vertex, w: data vertex (offset by rows)
    };
    std::vector<Ends> ends;
    const std::size_t first_edge = sched.edges.size();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < n; ++c)
            if (check.get(r, c)) {
                sched.edges.push_back({side, static_cast<std::uint32_t>(r),
                                       static_cast<std::uint32_t>(c), 0});
                ends.push_back({r, rows + c});
            }
    if (ends.empty()) return 0;

    std::vector<std::size_t> deg(rows + n, 0);
    for (const auto& e : ends) {
        ++deg[e.u];
        ++deg[e.w];
    }
    const std::size_t delta = *std::max_element(deg.begin(), deg.end());

    // at[v * delta + c] = edge currently colored c at vertex v, or -1.
    std::vector<std::int64_t> at((rows + n) * delta, -1);
    auto slot = [&](std::size_t v, std::size_t c) -> std::int64_t& { return at[v * delta + c]; };
    std::vector<std::size_t> color(ends.size(), 0);
    auto free_color = [&](std::size_t v) -> std::size_t {
        for (std::size_t c = 0; c < delta; ++c)
            if (slot(v, c) < 0) return c;
        throw std::logic_error("color_tanner_graph: no free color"); // unreachable
    };

    for (std::size_t ei = 0; ei < ends.size(); ++ei) {
        const std::size_t u = ends[ei].u, w = ends[ei].w;
        const std::size_t a = free_color(u);
        const std::size_t bcol = free_color(w);
        if (a != bcol) {
            // Flip the (a, bcol)-alternating path starting at w with color a.
            // Bipartiteness guarantees it never reaches u, so a frees up at w
            // while staying free at u.
            std::vector<std::size_t> path;
            std::size_t v = w, c = a;
            while (slot(v, c) >= 0) {
                const auto f = static_cast<std::size_t>(slot(v, c));
                path.push_back(f);
                v = ends[f].u == v ? ends[f].w : ends[f].u;
                c = c == a ? bcol : a;
            }
            for (auto f : path) {
                slot(ends[f].u, color[f]) = -1;
                slot(ends[f].w, color[f]) = -1;
            }
            for (auto f : path) {
                color[f] = color[f] == a ? bcol : a;
                slot(ends[f].u, color[f]) = static_cast<std::int64_t>(f);
                slot(ends[f].w, color[f]) = static_cast<std::int64_t>(f);
            }
        }
        color[ei] = a;
        slot(u, a) = static_cast<std::int64_t>(ei);
        slot(w, a) = static_cast<std::int64_t>(ei);
    }

    for (std::size_t ei = 0; ei < ends.size(); ++ei)
        sched.edges[first_edge + ei].color = static_cast<std::uint32_t>(offset + color[ei]);
    return delta;
}

} // namespace

ParitySchedule color_tanner_graph(const BitMatrix& check_x, const BitMatrix& check_z) {
    if (check_x.rows() > 0 && check_z.rows() > 0 && check_x.cols() != check_z.cols())
        throw std::invalid_argument("color_tanner_graph: column count mismatch");

    // All X couplings strictly precede all Z couplings. For any CSS pair the
    // shared support is even, so the X-ancilla operators a Z outcome drags in
    // (and vice versa) cancel pairwise; outcomes equal the ideal projective
    // parity checks for every code, with no condition on the per-side orders.
    ParitySchedule sched;
    const std::size_t dx = color_side(check_x, PauliBasis::x, 0, sched);
    const std::size_t dz = color_side(check_z, PauliBasis::z, dx, sched);
    sched.depth = dx + dz;
    std::sort(sched.edges.begin(), sched.edges.end(),
              [](const ParitySchedule::Edge& x, const ParitySchedule::Edge& y) {
                  if (x.color != y.color) return x.color < y.color;
                  if (x.side != y.side) return x.side == PauliBasis::x;
                  if (x.row != y.row) return x.row < y.row;
                  return x.col < y.col;
              });
    return sched;
}

// ---------------------------------------------------------------------------
// Parity rounds
// ---------------------------------------------------------------------------

RoundRecords append_parity_round(CircuitBuilder& b, const ParitySchedule& sched,
                                 const std::vector<std::uint32_t>& x_anc,
                                 const std::vector<std::uint32_t>& z_anc) {
    b.begin_step();
    for (auto q : x_anc) b.prep(q, PauliBasis::x);
    for (auto q : z_anc) b.prep(q, PauliBasis::z);
    b.end_step();

    std::size_t i = 0;
    for (std::size_t layer = 0; layer < sched.depth; ++layer) {
        b.begin_step();
        for (; i < sched.edges.size() && sched.edges[i].color == layer; ++i) {
            const auto& e = sched.edges[i];
            if (e.side == PauliBasis::x)
                b.cx(x_anc.at(e.row), e.col);
            else
                b.cx(e.col, z_anc.at(e.row));
        }
        b.end_step();
    }

    RoundRecords rec;
    rec.x.reserve(x_anc.size());
    rec.z.reserve(z_anc.size());
    b.begin_step();
    for (auto q : x_anc) rec.x.push_back(b.meas(q, PauliBasis::x, /*deactivate=*/true));
    for (auto q : z_anc) rec.z.push_back(b.meas(q, PauliBasis::z, /*deactivate=*/true));
    b.end_step();
    return rec;
}

namespace {

// Record indices rec[c] over the support of `row`.
void append_supported(std::vector<std::uint32_t>& out, const BitVector& row,
                      const std::vector<std::uint32_t>& rec) {
    for (std::size_t c = 0; c < row.size(); ++c)
        if (row.get(c)) out.push_back(rec.at(c));
}

std::vector<std::uint32_t> supported(const BitVector& row,
                                     const std::vector<std::uint32_t>& rec) {
    std::vector<std::uint32_t> out;
    append_supported(out, row, rec);
    return out;
}

} // namespace

Circuit schedule_parity_circuit(const BitMatrix& check_x, const BitMatrix& check_z,
                                std::size_t rounds) {
    if (rounds == 0) throw std::invalid_argument("schedule_parity_circuit: rounds == 0");
    const std::size_t n = std::max(check_x.cols(), check_z.cols());
    const std::size_t rx = check_x.rows(), rz = check_z.rows();
    const ParitySchedule sched = color_tanner_graph(check_x, check_z);

    CircuitBuilder b(static_cast<std::uint32_t>(n + rx + rz));
    for (std::size_t q = 0; q < n; ++q) b.activate(static_cast<std::uint32_t>(q));
    std::vector<std::uint32_t> xa(rx), za(rz);
    for (std::size_t i = 0; i < rx; ++i) xa[i] = static_cast<std::uint32_t>(n + i);
    for (std::size_t i = 0; i < rz; ++i) za[i] = static_cast<std::uint32_t>(n + rx + i);

    RoundRecords prev;
    for (std::size_t r = 0; r < rounds; ++r) {
        RoundRecords cur = append_parity_round(b, sched, xa, za);
        if (r > 0) {
            for (std::size_t i = 0; i < rx; ++i)
                b.add_detector(PauliBasis::x, {prev.x[i], cur.x[i]});
            for (std::size_t i = 0; i < rz; ++i)
                b.add_detector(PauliBasis::z, {prev.z[i], cur.z[i]});
        }
        prev = std::move(cur);
    }
    return b.take();
}

Circuit build_memory_circuit(const CssCode& code, std::size_t rounds, PauliBasis prep) {
    if (rounds == 0) throw std::invalid_argument("build_memory_circuit: rounds == 0");
    code.ensure_valid("build_memory_circuit");
    const std::size_t n = code.n(), k = code.k();
    const std::size_t rx = code.h_x.rows(), rz = code.h_z.rows();
    const ParitySchedule sched = color_tanner_graph(code.h_x, code.h_z);

    CircuitBuilder b(static_cast<std::uint32_t>(n + rx + rz));
    std::vector<std::uint32_t> xa(rx), za(rz);
    for (std::size_t i = 0; i < rx; ++i) xa[i] = static_cast<std::uint32_t>(n + i);
    for (std::size_t i = 0; i < rz; ++i) za[i] = static_cast<std::uint32_t>(n + rx + i);

    b.begin_step();
    for (std::size_t q = 0; q < n; ++q) b.prep(static_cast<std::uint32_t>(q), prep);
    b.end_step();

    RoundRecords prev;
    for (std::size_t r = 0; r < rounds; ++r) {
        RoundRecords cur = append_parity_round(b, sched, xa, za);
        if (r == 0) {
            // Prep-side checks stabilize the fresh product state; the other
            // side's first records are reference randomness that anchors
            // later comparisons.
            if (prep == PauliBasis::x)
                for (std::size_t i = 0; i < rx; ++i) b.add_detector(PauliBasis::x, {cur.x[i]});
            else
                for (std::size_t i = 0; i < rz; ++i) b.add_detector(PauliBasis::z, {cur.z[i]});
        } else {
            for (std::size_t i = 0; i < rx; ++i)
                b.add_detector(PauliBasis::x, {prev.x[i], cur.x[i]});
            for (std::size_t i = 0; i < rz; ++i)
                b.add_detector(PauliBasis::z, {prev.z[i], cur.z[i]});
        }
        prev = std::move(cur);
    }

    std::vector<std::uint32_t> vx(n), vz(n);
    b.begin_step();
    for (std::size_t q = 0; q < n; ++q)
        vx[q] = b.meas_virtual(static_cast<std::uint32_t>(q), PauliBasis::x);
    b.end_step();
    b.begin_step();
    for (std::size_t q = 0; q < n; ++q)
        vz[q] = b.meas_virtual(static_cast<std::uint32_t>(q), PauliBasis::z);
    b.end_step();

    for (std::size_t i = 0; i < rx; ++i) {
        std::vector<std::uint32_t> meas{prev.x[i]};
        append_supported(meas, code.h_x.row(i), vx);
        b.add_detector(PauliBasis::x, std::move(meas));
    }
    for (std::size_t i = 0; i < rz; ++i) {
        std::vector<std::uint32_t> meas{prev.z[i]};
        append_supported(meas, code.h_z.row(i), vz);
        b.add_detector(PauliBasis::z, std::move(meas));
    }

    for (std::size_t j = 0; j < k; ++j)
        b.add_observable("Z[" + std::to_string(j) + "]", PauliBasis::z,
                         supported(code.j_z.row(j), vz));
    for (std::size_t j = 0; j < k; ++j)
        b.add_observable("X[" + std::to_string(j) + "]", PauliBasis::x,
                         supported(code.j_x.row(j), vx));
    return b.take();
}

// ---------------------------------------------------------------------------
// Injection experiment
// ---------------------------------------------------------------------------

InjectionExperiment build_injection_experiment(const CssCode& reg, const CssCode& noisy,
                                               std::size_t q, const BitMatrix& alpha_reg,
                                               std::size_t d_r, std::size_t d_t,
                                               PauliBasis prep) {
    reg.ensure_valid("injection register code");
    if (d_t < 2) throw std::invalid_argument("build_injection_experiment: d_t must be >= 2");
    if (d_r == 0) throw std::invalid_argument("build_injection_experiment: d_r must be >= 1");
    const std::size_t k_reg = reg.k();
    if (alpha_reg.rows() != q) throw std::invalid_argument("alpha_reg must have q rows");
    if (q > 0 && alpha_reg.cols() != k_reg)
        throw std::invalid_argument("alpha_reg must have k(register) columns");

    // Re-express the register logical basis so the measured combinations are
    // the leading generators; the canonical pairing then applies verbatim.
    CssCode reg2 = reg;
    if (q > 0) {
        noisy.ensure_valid("injection noisy code");
        const RrefResult rr = rref(alpha_reg);
        if (rr.rank != q)
            throw std::invalid_argument("alpha_reg must have full row rank");
        bool leading_units = true;
        for (std::size_t j = 0; j < q && leading_units; ++j)
            for (std::size_t c = 0; c < k_reg && leading_units; ++c)
                leading_units = alpha_reg.get(j, c) == (c == j);
        if (!leading_units) {
            std::vector<std::uint8_t> is_pivot(k_reg, 0);
            for (auto p : rr.pivots) is_pivot[p] = 1;
            BitMatrix completion(k_reg - q, k_reg);
            std::size_t cr = 0;
            for (std::size_t c = 0; c < k_reg; ++c)
                if (!is_pivot[c]) completion.set(cr++, c, true);
            const BitMatrix m = vstack(alpha_reg, completion);
            const auto m_inv = right_inverse(m);
            if (!m_inv) throw std::invalid_argument("alpha_reg completion is singular");
            reg2.j_z = m.mul(reg.j_z);
            reg2.j_x = m_inv->transposed().mul(reg.j_x);
            reg2.ensure_valid("register code after measured-basis change");
        }
    }

    const CssCode comp = q > 0 ? make_composite(reg2, noisy, q) : reg2;
    AlphaPair ap;
    if (q > 0) {
        ap = make_injection_alphas(k_reg, noisy.k(), q);
    } else {
        ap.alpha = BitMatrix(0, k_reg);
        ap.alpha_perp = BitMatrix::identity(k_reg);
        ap.alpha_perp_r = BitMatrix::identity(k_reg);
    }

    DeformedCode dc;
    if (q > 0) {
        const GlueCode base = build_graph_glue(comp, ap, GluePolicy::path);
        dc = assemble_deformed(comp, ap, base, d_r);
    } else {
        dc.base = comp;
        dc.alphas = ap;
        dc.d_r = d_r;
        dc.deformed = comp;
        dc.glue.s = BitMatrix(0, comp.n());
        dc.glue.t = BitMatrix(comp.h_x.rows(), 0);
        dc.glue.r = BitMatrix(comp.n(), 0);
        dc.glue.beta = BitMatrix(k_reg, 0);
        dc.glue.d_r = d_r;
    }

    const std::size_t n = comp.n();
    const std::size_t nbar = dc.n_bar();
    const std::size_t seam = nbar - n;
    const std::size_t rx = comp.h_x.rows(), rz = comp.h_z.rows();
    const std::size_t rxbar = dc.deformed.h_x.rows(), rzbar = dc.deformed.h_z.rows();
    const std::size_t k = comp.k();

    CircuitBuilder b(static_cast<std::uint32_t>(nbar + rxbar + rzbar));
    std::vector<std::uint32_t> xa_def(rxbar), za_def(rzbar);
    for (std::size_t i = 0; i < rxbar; ++i) xa_def[i] = static_cast<std::uint32_t>(nbar + i);
    for (std::size_t i = 0; i < rzbar; ++i)
        za_def[i] = static_cast<std::uint32_t>(nbar + rxbar + i);
    const std::vector<std::uint32_t> xa_base(xa_def.begin(), xa_def.begin() + rx);
    const std::vector<std::uint32_t> za_base(za_def.begin(), za_def.begin() + rz);

    const ParitySchedule sched_base = color_tanner_graph(comp.h_x, comp.h_z);
    const ParitySchedule sched_def = color_tanner_graph(dc.deformed.h_x, dc.deformed.h_z);

    InjectionExperiment exp;

    b.begin_step();
    for (std::size_t i = 0; i < n; ++i) b.prep(static_cast<std::uint32_t>(i), prep);
    b.end_step();

    // Phase A: the undeformed composite code.
    RoundRecords prev;
    for (std::size_t r = 0; r < d_t; ++r) {
        RoundRecords cur = append_parity_round(b, sched_base, xa_base, za_base);
        if (r == 0) {
            if (prep == PauliBasis::x)
                for (std::size_t i = 0; i < rx; ++i) b.add_detector(PauliBasis::x, {cur.x[i]});
            else
                for (std::size_t i = 0; i < rz; ++i) b.add_detector(PauliBasis::z, {cur.z[i]});
        } else {
            for (std::size_t i = 0; i < rx; ++i)
                b.add_detector(PauliBasis::x, {prev.x[i], cur.x[i]});
            for (std::size_t i = 0; i < rz; ++i)
                b.add_detector(PauliBasis::z, {prev.z[i], cur.z[i]});
        }
        prev = std::move(cur);
    }

    if (seam > 0) {
        b.begin_step();
        for (std::size_t e = 0; e < seam; ++e)
            b.prep(static_cast<std::uint32_t>(n + e), PauliBasis::x);
        b.end_step();
        exp.seam_prep_step = b.steps_committed() - 1;
    }

    // Phase B: the deformed code. First-round vertex checks are projective
    // (their value carries the measured logical outcome), so they anchor the
    // outcome observables instead of feeding a detector.
    RoundRecords prevd;
    for (std::size_t r = 0; r < d_t; ++r) {
        RoundRecords cur = append_parity_round(b, sched_def, xa_def, za_def);
        if (cur.z.size() > rz)
            exp.vertex_meas.emplace_back(cur.z.begin() + static_cast<std::ptrdiff_t>(rz),
                                         cur.z.end());
        if (r == 0) {
            // Extended X checks continue phase-A values (the seam extension
            // acts on fresh |+>), and meta checks are born satisfied.
            for (std::size_t i = 0; i < rx; ++i)
                b.add_detector(PauliBasis::x, {prev.x[i], cur.x[i]});
            for (std::size_t i = rx; i < rxbar; ++i) b.add_detector(PauliBasis::x, {cur.x[i]});
            for (std::size_t i = 0; i < rz; ++i)
                b.add_detector(PauliBasis::z, {prev.z[i], cur.z[i]});
        } else {
            for (std::size_t i = 0; i < rxbar; ++i)
                b.add_detector(PauliBasis::x, {prevd.x[i], cur.x[i]});
            for (std::size_t i = 0; i < rzbar; ++i)
                b.add_detector(PauliBasis::z, {prevd.z[i], cur.z[i]});
        }
        prevd = std::move(cur);
    }

    std::vector<std::uint32_t> sx;
    if (seam > 0) {
        b.begin_step();
        for (std::size_t e = 0; e < seam; ++e)
            sx.push_back(b.meas(static_cast<std::uint32_t>(n + e), PauliBasis::x,
                                /*deactivate=*/true));
        b.end_step();
        exp.seam_readout_step = b.steps_committed() - 1;
    }

    // Phase C: back to the composite code. The seam X readout lets every
    // extended X check and meta check be closed out against its last value.
    const BitMatrix t_ext = dc.deformed.h_x.block(0, n, rx, seam);
    const BitMatrix meta_ext = dc.deformed.h_x.block(rx, n, rxbar - rx, seam);
    for (std::size_t r = 0; r < d_t; ++r) {
        RoundRecords cur = append_parity_round(b, sched_base, xa_base, za_base);
        if (r == 0) {
            for (std::size_t i = 0; i < rx; ++i) {
                std::vector<std::uint32_t> meas{prevd.x[i]};
                append_supported(meas, t_ext.row(i), sx);
                meas.push_back(cur.x[i]);
                b.add_detector(PauliBasis::x, std::move(meas));
            }
            for (std::size_t i = rx; i < rxbar; ++i) {
                std::vector<std::uint32_t> meas{prevd.x[i]};
                append_supported(meas, meta_ext.row(i - rx), sx);
                b.add_detector(PauliBasis::x, std::move(meas));
            }
            for (std::size_t i = 0; i < rz; ++i)
                b.add_detector(PauliBasis::z, {prevd.z[i], cur.z[i]});
        } else {
            for (std::size_t i = 0; i < rx; ++i)
                b.add_detector(PauliBasis::x, {prev.x[i], cur.x[i]});
            for (std::size_t i = 0; i < rz; ++i)
                b.add_detector(PauliBasis::z, {prev.z[i], cur.z[i]});
        }
        prev = std::move(cur);
    }

    std::vector<std::uint32_t> vx(n), vz(n);
    b.begin_step();
    for (std::size_t i = 0; i < n; ++i)
        vx[i] = b.meas_virtual(static_cast<std::uint32_t>(i), PauliBasis::x);
    b.end_step();
    b.begin_step();
    for (std::size_t i = 0; i < n; ++i)
        vz[i] = b.meas_virtual(static_cast<std::uint32_t>(i), PauliBasis::z);
    b.end_step();

    for (std::size_t i = 0; i < rx; ++i) {
        std::vector<std::uint32_t> meas{prev.x[i]};
        append_supported(meas, comp.h_x.row(i), vx);
        b.add_detector(PauliBasis::x, std::move(meas));
    }
    for (std::size_t i = 0; i < rz; ++i) {
        std::vector<std::uint32_t> meas{prev.z[i]};
        append_supported(meas, comp.h_z.row(i), vz);
        b.add_detector(PauliBasis::z, std::move(meas));
    }

    const BitMatrix z_log = ap.alpha_perp_r.mul(comp.j_z);
    for (std::size_t j = 0; j < k - q; ++j)
        exp.obs_z.push_back(b.add_observable("Z[" + std::to_string(j) + "]", PauliBasis::z,
                                             supported(z_log.row(j), vz)));
    if (q > 0) {
        const BitMatrix y = outcome_extractor(dc); // q x thickened vertex count
        for (std::size_t j = 0; j < q; ++j)
            exp.obs_oc.push_back(b.add_observable("oc[" + std::to_string(j) + "]",
                                                  PauliBasis::z,
                                                  supported(y.row(j), exp.vertex_meas.at(0))));
    }
    const BitMatrix x_log = ap.alpha_perp.mul(comp.j_x);
    for (std::size_t j = 0; j < k - q; ++j) {
        std::vector<std::uint32_t> meas = supported(x_log.row(j), vx);
        append_supported(meas, dc.glue.beta.row(j), sx);
        exp.obs_x.push_back(
            b.add_observable("X[" + std::to_string(j) + "]", PauliBasis::x, std::move(meas)));
    }

    exp.dc = std::move(dc);
    exp.circuit = b.take();
    return exp;
}

Circuit build_injection_circuit(const CssCode& reg, const CssCode& noisy, std::size_t q,
                                const BitMatrix& alpha_reg, std::size_t d_r,
                                std::size_t d_t, PauliBasis prep) {
    return build_injection_experiment(reg, noisy, q, alpha_reg, d_r, d_t, prep).circuit;
}

// ---------------------------------------------------------------------------
// Structural invariants
// ---------------------------------------------------------------------------

std::vector<std::string> check_circuit_invariants(const Circuit& c) {
    std::vector<std::string> issues;
    enum class St : std::uint8_t { virgin, live, dead };
    std::vector<St> st(c.num_qubits, St::virgin);
    std::vector<PauliBasis> prep_basis(c.num_qubits, PauliBasis::z);
    std::vector<std::uint8_t> has_prep(c.num_qubits, 0);
    std::size_t rec = 0;

    for (std::size_t s = 0; s < c.steps.size(); ++s) {
        const auto& ops = c.steps[s].ops;
        const std::string where = "step " + std::to_string(s) + ": ";
        bool virtual_only = !ops.empty();
        for (const auto& op : ops) virtual_only = virtual_only && op.kind == OpKind::meas_virtual;

        std::vector<St> before = st;
        std::vector<std::uint8_t> touched(c.num_qubits, 0);
        auto touch1 = [&](std::uint32_t q) {
            if (q >= c.num_qubits) {
                issues.push_back(where + "qubit " + std::to_string(q) + " out of range");
                return false;
            }
            if (touched[q])
                issues.push_back(where + "qubit " + std::to_string(q) +
                                 " used twice in one timestep");
            touched[q] = 1;
            return true;
        };
        auto require_live = [&](std::uint32_t q, const char* what) {
            if (st[q] == St::dead)
                issues.push_back(where + std::string(what) + " on measured-out qubit " +
                                 std::to_string(q));
            st[q] = St::live; // virgin qubits count as externally prepared data
        };

        for (const auto& op : ops) {
            switch (op.kind) {
            case OpKind::prep:
                if (!touch1(op.a)) break;
                st[op.a] = St::live;
                prep_basis[op.a] = op.basis;
                has_prep[op.a] = 1;
                break;
            case OpKind::cx:
                if (op.a == op.b) issues.push_back(where + "cx with equal qubits");
                if (touch1(op.a)) require_live(op.a, "cx");
                if (touch1(op.b)) require_live(op.b, "cx");
                break;
            case OpKind::idle:
                if (touch1(op.a)) require_live(op.a, "idle");
                break;
            case OpKind::meas:
            case OpKind::meas_virtual: {
                if (!touch1(op.a)) break;
                require_live(op.a, "measurement");
                const bool is_virtual = op.kind == OpKind::meas_virtual;
                if (rec >= c.num_measurements()) {
                    issues.push_back(where + "more measurement ops than records");
                } else {
                    if (c.meas_qubit[rec] != op.a || c.meas_basis[rec] != op.basis ||
                        c.meas_is_virtual[rec] != (is_virtual ? 1 : 0) || c.meas_step[rec] != s)
                        issues.push_back(where + "record " + std::to_string(rec) +
                                         " metadata mismatch");
                }
                if (!is_virtual) {
                    if (has_prep[op.a] && prep_basis[op.a] != op.basis)
                        issues.push_back(where + "qubit " + std::to_string(op.a) +
                                         " measured in a different basis than prepared");
                    if (op.b == 1) st[op.a] = St::dead;
                }
                ++rec;
                break;
            }
            }
        }

        if (!virtual_only) {
            for (std::uint32_t q = 0; q < c.num_qubits; ++q)
                if (before[q] == St::live && !touched[q])
                    issues.push_back(where + "live qubit " + std::to_string(q) +
                                     " has no operation (missing idle)");
        }
    }

    if (rec != c.num_measurements())
        issues.push_back("measurement record count mismatch: " + std::to_string(rec) +
                         " ops vs " + std::to_string(c.num_measurements()) + " records");
    for (std::size_t d = 0; d < c.detectors.size(); ++d) {
        if (c.detectors[d].meas.empty())
            issues.push_back("detector " + std::to_string(d) + " is empty");
        for (auto m : c.detectors[d].meas)
            if (m >= c.num_measurements())
                issues.push_back("detector " + std::to_string(d) + " references record " +
                                 std::to_string(m) + " out of range");
    }
    for (std::size_t o = 0; o < c.observables.size(); ++o) {
        if (c.observables[o].meas.empty())
            issues.push_back("observable " + c.observables[o].name + " is empty");
        for (auto m : c.observables[o].meas)
            if (m >= c.num_measurements())
                issues.push_back("observable " + c.observables[o].name + " references record " +
                                 std::to_string(m) + " out of range");
    }
    return issues;
}

} // namespace qsurgery
