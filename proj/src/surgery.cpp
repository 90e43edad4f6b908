#include "qsurgery/surgery.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace qsurgery {

std::vector<std::string> AlphaPair::validate() const {
    std::vector<std::string> bad;
    std::size_t kk = alpha.cols(), qq = alpha.rows();
    if (alpha_perp.cols() != kk || alpha_perp_r.cols() != kk)
        bad.push_back("alpha matrices disagree on k");
    if (alpha_perp.rows() != kk - qq || alpha_perp_r.rows() != kk - qq)
        bad.push_back("alpha_perp/alpha_perp_r must have k - q rows");
    if (!bad.empty()) return bad;
    if (alpha.rank() != qq)
        bad.push_back("alpha rows are dependent");
    if (alpha_perp.rank() != kk - qq)
        bad.push_back("alpha_perp rows are dependent");
    if (!alpha_perp.mul(alpha.transposed()).is_zero())
        bad.push_back("alpha_perp alpha^T != 0");
    if (alpha_perp.mul(alpha_perp_r.transposed()) != BitMatrix::identity(kk - qq))
        bad.push_back("alpha_perp alpha_perp_r^T != identity");
    if (vstack(alpha, alpha_perp_r).rank() != kk)
        bad.push_back("alpha_perp_r classes collide with measured combinations");
    return bad;
}

void AlphaPair::ensure_valid(const std::string& context) const {
    auto bad = validate();
    if (bad.empty()) return;
    std::string msg = context + ": invalid alpha pair:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw std::runtime_error(msg);
}

AlphaPair derive_alpha_pair(const BitMatrix& alpha) {
    AlphaPair ap;
    ap.alpha = alpha;
    if (alpha.rank() != alpha.rows())
        throw std::invalid_argument("derive_alpha_pair: alpha rows are dependent");
    ap.alpha_perp = kernel_basis(alpha);
    if (ap.alpha_perp.rows() != alpha.cols() - alpha.rows())
        throw std::runtime_error("derive_alpha_pair: kernel dimension mismatch");
    auto rinv = right_inverse(ap.alpha_perp);
    if (!rinv)
        throw std::runtime_error("derive_alpha_pair: alpha_perp has no right inverse");
    ap.alpha_perp_r = rinv->transposed();
    ap.ensure_valid("derive_alpha_pair");
    return ap;
}

AlphaPair make_injection_alphas(std::size_t k_reg, std::size_t k_noi, std::size_t q) {
    if (q > k_reg)
        throw std::invalid_argument("make_injection_alphas: q exceeds register logicals");
    if (k_noi == 0)
        throw std::invalid_argument("make_injection_alphas: noisy block has no logicals");
    std::size_t k = k_reg + q * k_noi;
    AlphaPair ap;
    ap.alpha = BitMatrix(q, k);
    ap.alpha_perp = BitMatrix(k - q, k);
    ap.alpha_perp_r = BitMatrix(k - q, k);
    for (std::size_t j = 0; j < q; ++j) {
        std::size_t noisy_first = k_reg + j * k_noi;
        ap.alpha.set(j, j, true);
        ap.alpha.set(j, noisy_first, true);
        // Survivor slot j: X side is the static pair X_j x_j, Z side the bare
        // register operator Z_j.
        ap.alpha_perp.set(j, j, true);
        ap.alpha_perp.set(j, noisy_first, true);
        ap.alpha_perp_r.set(j, j, true);
    }
    std::size_t slot = q;
    for (std::size_t j = q; j < k_reg; ++j, ++slot) { // idle register logicals
        ap.alpha_perp.set(slot, j, true);
        ap.alpha_perp_r.set(slot, j, true);
    }
    for (std::size_t b = 0; b < q; ++b) // extra logicals of each noisy block
        for (std::size_t t = 1; t < k_noi; ++t, ++slot) {
            std::size_t col = k_reg + b * k_noi + t;
            ap.alpha_perp.set(slot, col, true);
            ap.alpha_perp_r.set(slot, col, true);
        }
    ap.ensure_valid("make_injection_alphas");
    return ap;
}

namespace {

/// Solve the witness systems shared by build and thicken.
void solve_witnesses(const CssCode& code, const AlphaPair& alphas, GlueCode& g) {
    BitMatrix l = alphas.alpha.mul(code.j_z); // q x n, measured operators
    BitMatrix hgt = g.h_g.transposed();

    // i) H_X S^T = T H_G, solved as H_G^T T^T = S H_X^T.
    auto tt = solve_right(hgt, g.s.mul(code.h_x.transposed()));
    if (!tt)
        throw std::runtime_error(
            "surgery: no T with H_X S^T = T H_G; a measured operator's glue "
            "subgraph cannot absorb the X checks (disconnected support?)");
    g.t = tt->transposed();

    // iii) Y := alpha J_Z R with Y S = alpha J_Z and Y H_G^T = 0.
    BitMatrix rhs = hstack(l, BitMatrix(alphas.q(), g.r_g()));
    auto y = solve_left(hstack(g.s, hgt), rhs);
    if (!y)
        throw std::runtime_error(
            "surgery: no Y with Y S = alpha J_Z and Y H_G^T = 0; the glue "
            "graph does not reproduce the measured operators (disconnected?)");
    auto r = solve_right(l, *y);
    if (!r)
        throw std::runtime_error("surgery: alpha J_Z R = Y has no solution");
    g.r = *r;

    // iv) alpha_perp J_X S^T = beta H_G, solved as H_G^T beta^T = S (alpha_perp J_X)^T.
    BitMatrix xl = alphas.alpha_perp.mul(code.j_x);
    auto bt = solve_right(hgt, g.s.mul(xl.transposed()));
    if (!bt)
        throw std::runtime_error(
            "surgery: no beta with alpha_perp J_X S^T = beta H_G");
    g.beta = bt->transposed();
}

} // namespace

GlueCode build_graph_glue(const CssCode& code, const AlphaPair& alphas, GluePolicy policy) {
    code.ensure_valid("build_graph_glue");
    alphas.ensure_valid("build_graph_glue");
    if (alphas.k() != code.k())
        throw std::invalid_argument("build_graph_glue: alpha k mismatch");

    BitMatrix l = alphas.alpha.mul(code.j_z);
    std::size_t q = alphas.q(), n = code.n();

    // Vertices: one per qubit of each measured support, in (operator, qubit)
    // order. Supports must not overlap.
    std::vector<int> owner(n, -1);
    std::vector<std::vector<std::size_t>> support(q);
    for (std::size_t j = 0; j < q; ++j)
        for (std::size_t c = 0; c < n; ++c)
            if (l.get(j, c)) {
                if (owner[c] >= 0)
                    throw std::invalid_argument(
                        "build_graph_glue: measured operator supports overlap");
                owner[c] = static_cast<int>(j);
                support[j].push_back(c);
            }

    GlueCode g;
    g.d_r = 1;
    std::size_t n_g = 0;
    for (const auto& s : support) n_g += s.size();
    g.s = BitMatrix(n_g, n);
    std::vector<std::size_t> vertex_of_qubit(n, 0);
    std::size_t v = 0;
    for (std::size_t j = 0; j < q; ++j)
        for (std::size_t c : support[j]) {
            g.s.set(v, c, true);
            g.vertex_op.push_back(j);
            vertex_of_qubit[c] = v++;
        }

    // Edges within each operator per the requested policy.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t j = 0; j < q; ++j) {
        const auto& sup = support[j];
        if (policy == GluePolicy::path) {
            for (std::size_t i = 0; i + 1 < sup.size(); ++i)
                edges.emplace_back(vertex_of_qubit[sup[i]], vertex_of_qubit[sup[i + 1]]);
        } else {
            for (std::size_t a = 0; a < sup.size(); ++a)
                for (std::size_t b = a + 1; b < sup.size(); ++b) {
                    bool shared = false;
                    for (std::size_t rr = 0; rr < code.h_x.rows() && !shared; ++rr)
                        shared = code.h_x.get(rr, sup[a]) && code.h_x.get(rr, sup[b]);
                    if (shared)
                        edges.emplace_back(vertex_of_qubit[sup[a]], vertex_of_qubit[sup[b]]);
                }
        }
    }
    g.h_g = BitMatrix(edges.size(), n_g);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        g.h_g.set(e, edges[e].first, true);
        g.h_g.set(e, edges[e].second, true);
    }

    // Cycle space: fundamental cycles of the non-tree edges.
    std::vector<std::size_t> comp(n_g, n_g);
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n_g); // (nbr, edge)
    std::vector<bool> tree_edge(edges.size(), false);
    std::vector<std::size_t> parent_vertex(n_g, n_g), parent_edge(n_g, edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
        adj[edges[e].first].emplace_back(edges[e].second, e);
        adj[edges[e].second].emplace_back(edges[e].first, e);
    }
    for (std::size_t root = 0; root < n_g; ++root) {
        if (comp[root] != n_g) continue;
        std::vector<std::size_t> stack{root};
        comp[root] = root;
        while (!stack.empty()) {
            std::size_t u = stack.back();
            stack.pop_back();
            for (auto [w, e] : adj[u])
                if (comp[w] == n_g) {
                    comp[w] = root;
                    tree_edge[e] = true;
                    parent_vertex[w] = u;
                    parent_edge[w] = e;
                    stack.push_back(w);
                }
        }
    }
    // Every measured operator must induce one connected piece, or the seam
    // cannot transport its X-side partners (the beta witness has no solution).
    for (std::size_t j = 0; j < q; ++j) {
        std::size_t first = vertex_of_qubit[support[j][0]];
        for (std::size_t c : support[j])
            if (comp[vertex_of_qubit[c]] != comp[first])
                throw std::invalid_argument(
                    "build_graph_glue: support of measured operator " + std::to_string(j) +
                    " is disconnected under this policy; the path policy always connects it");
    }

    auto path_to_root = [&](std::size_t u, BitVector& into) {
        while (parent_vertex[u] != n_g) {
            into.flip(parent_edge[u]);
            u = parent_vertex[u];
        }
    };
    std::vector<BitVector> cycles;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (tree_edge[e]) continue;
        BitVector cyc(edges.size());
        cyc.set(e, true);
        path_to_root(edges[e].first, cyc);
        path_to_root(edges[e].second, cyc); // shared segments cancel over GF(2)
        cycles.push_back(cyc);
    }
    g.h_m = BitMatrix(cycles.size(), edges.size());
    for (std::size_t i = 0; i < cycles.size(); ++i) g.h_m.set_row(i, cycles[i]);

    solve_witnesses(code, alphas, g);
    return g;
}

GlueCode thicken_sticker(const CssCode& code, const AlphaPair& alphas,
                         const GlueCode& base, std::size_t d_r) {
    if (d_r == 0) throw std::invalid_argument("thicken_sticker: d_r must be >= 1");
    std::size_t n_g = base.n_g(), r_g = base.r_g();
    BitMatrix lambda = make_repetition_chain(d_r); // (d_r-1) x d_r
    BitMatrix e1(d_r, 1);
    e1.set(0, 0, true);

    GlueCode g;
    g.d_r = d_r;
    g.s = kron(e1, base.s); // layer-0 vertices keep the data mapping
    // Edges: vertical (layer seams, one per base vertex) first, then the
    // base edges repeated per layer.
    g.h_g = vstack(kron(lambda, BitMatrix::identity(n_g)),
                   kron(BitMatrix::identity(d_r), base.h_g));
    // Meta checks: one plaquette per (seam, base edge), plus the base cycle
    // checks lifted to every layer. Without the lifted block a cyclic base
    // graph would leave the thickened sticker under-constrained.
    std::size_t vert_cols = (d_r - 1) * n_g;
    BitMatrix plaquettes = hstack(kron(BitMatrix::identity(d_r - 1), base.h_g),
                                  kron(lambda, BitMatrix::identity(r_g)));
    BitMatrix lifted = hstack(BitMatrix(d_r * base.r_m(), vert_cols),
                              kron(BitMatrix::identity(d_r), base.h_m));
    g.h_m = vstack(plaquettes, lifted);

    g.vertex_op.reserve(d_r * n_g);
    for (std::size_t layer = 0; layer < d_r; ++layer)
        for (std::size_t v = 0; v < n_g; ++v) g.vertex_op.push_back(base.vertex_op[v]);

    solve_witnesses(code, alphas, g);
    return g;
}

DeformedCode assemble_deformed(const CssCode& code, const AlphaPair& alphas,
                               const GlueCode& base_glue, std::size_t d_r) {
    DeformedCode dc;
    dc.base = code;
    dc.alphas = alphas;
    dc.d_r = d_r;
    dc.glue = (d_r == base_glue.d_r) ? base_glue
                                     : thicken_sticker(code, alphas, base_glue, d_r);
    const GlueCode& g = dc.glue;
    std::size_t n = code.n(), r_g = g.r_g();

    CssCode& def = dc.deformed;
    def.h_x = vstack(hstack(code.h_x, g.t),
                     hstack(BitMatrix(g.r_m(), n), g.h_m));
    def.h_z = vstack(hstack(code.h_z, BitMatrix(code.h_z.rows(), r_g)),
                     hstack(g.s, g.h_g.transposed()));
    def.j_x = hstack(alphas.alpha_perp.mul(code.j_x), g.beta);
    def.j_z = hstack(alphas.alpha_perp_r.mul(code.j_z),
                     BitMatrix(alphas.k() - alphas.q(), r_g));
    def.ensure_valid("assemble_deformed");
    return dc;
}

Report verify_surgery_conditions(const DeformedCode& dc) {
    Report rep;
    const CssCode& code = dc.base;
    const AlphaPair& al = dc.alphas;
    const GlueCode& g = dc.glue;
    auto add = [&](const std::string& name, bool pass, const std::string& detail = "") {
        rep.items.push_back({name, pass, detail});
    };

    auto base_bad = code.validate();
    add("base code consistent", base_bad.empty(),
        base_bad.empty() ? "" : base_bad.front());
    auto al_bad = al.validate();
    add("alpha pair consistent", al_bad.empty(), al_bad.empty() ? "" : al_bad.front());

    // Structure of the sticker.
    bool s_ok = g.s.cols() == code.n();
    std::size_t s_weight = 0;
    for (std::size_t v = 0; v < g.n_g() && s_ok; ++v) {
        std::size_t w = g.s.row(v).weight();
        s_weight += w;
        if (w > 1) s_ok = false;
    }
    add("s maps vertices one-hot onto data qubits", s_ok);
    bool edges_ok = true;
    for (std::size_t e = 0; e < g.r_g() && edges_ok; ++e)
        edges_ok = g.h_g.row(e).weight() == 2;
    add("h_g rows are graph edges (weight 2)", edges_ok);

    add("i: h_x s^T = t h_g",
        code.h_x.mul(g.s.transposed()) == g.t.mul(g.h_g));
    add("ii: h_m h_g = 0", g.h_m.mul(g.h_g).is_zero());
    BitMatrix l = al.alpha.mul(code.j_z);
    BitMatrix y = l.mul(g.r);
    add("iii: (alpha j_z r) s = alpha j_z", y.mul(g.s) == l);
    add("iii: h_g (alpha j_z r)^T = 0", g.h_g.mul(y.transposed()).is_zero());
    add("iv: alpha_perp j_x s^T = beta h_g",
        al.alpha_perp.mul(code.j_x).mul(g.s.transposed()) == g.beta.mul(g.h_g));

    auto def_bad = dc.deformed.validate();
    add("deformed code consistent", def_bad.empty(),
        def_bad.empty() ? "" : def_bad.front());
    {
        std::ostringstream os;
        os << "k_bar = " << dc.deformed.k() << ", expected " << code.k() - al.q();
        add("deformed logical count k - q",
            dc.deformed.k() == code.k() - al.q(), os.str());
    }
    add("deformed qubit count n + r_g",
        dc.deformed.n() == code.n() + g.r_g());
    return rep;
}

BoundedPairResult check_bounded_pair(const BitMatrix& h_g, const BitMatrix& h_m,
                                     const BitMatrix& s, std::size_t d_r,
                                     std::uint64_t budget) {
    if (h_m.cols() != h_g.rows())
        throw std::invalid_argument("check_bounded_pair: h_m columns must index h_g rows");
    if (h_g.cols() != s.rows())
        throw std::invalid_argument("check_bounded_pair: h_g columns must index s rows");
    std::size_t r_g = h_g.rows();

    // Enumeration cost guard.
    std::uint64_t total = 1;
    for (std::size_t w = 1; w < d_r && w <= r_g; ++w) {
        std::uint64_t c = 1;
        for (std::size_t i = 0; i < w && c <= budget; ++i)
            c = c * (r_g - i) / (i + 1);
        total += c;
        if (total > budget)
            throw std::runtime_error("check_bounded_pair: enumeration exceeds budget");
    }
    BitMatrix vertex_kernel = kernel_basis(h_g); // {u : h_g u^T = 0}
    if (vertex_kernel.rows() >= 24 ||
        total * (std::uint64_t(1) << vertex_kernel.rows()) > budget * 16)
        throw std::runtime_error("check_bounded_pair: coset enumeration exceeds budget");

    std::vector<BitVector> kernel_rows;
    for (std::size_t i = 0; i < vertex_kernel.rows(); ++i)
        kernel_rows.push_back(vertex_kernel.row(i));

    auto examine = [&](const BitVector& v) -> bool {
        // Coset minimum of |u s| over solutions of h_g u^T = v^T.
        auto u0 = solve_right(h_g, BitMatrix::row_vector(v).transposed());
        if (!u0) return false;
        BitVector cur = u0->transposed().row(0);
        std::size_t best = s.vec_mul(cur).weight();
        std::uint64_t n_combos = std::uint64_t(1) << kernel_rows.size();
        for (std::uint64_t gcode = 1; gcode < n_combos && best > v.weight(); ++gcode) {
            cur ^= kernel_rows[std::countr_zero(gcode)];
            best = std::min(best, s.vec_mul(cur).weight());
        }
        return best <= v.weight();
    };

    // Weight-0 v is trivially bounded; scan all closed v with 0 < |v| < d_r.
    std::vector<std::size_t> idx;
    for (std::size_t w = 1; w < d_r; ++w) {
        idx.assign(w, 0);
        std::iota(idx.begin(), idx.end(), 0);
        if (w > r_g) break;
        while (true) {
            BitVector v(r_g);
            for (std::size_t i : idx) v.set(i, true);
            if (!h_m.mul_vec(v).any() && !examine(v)) {
                std::ostringstream os;
                os << "closed edge set of weight " << w
                   << " has no bounding vertex chain of s-weight <= " << w;
                return {false, v, os.str()};
            }
            // next combination
            std::size_t i = w;
            while (i > 0 && idx[i - 1] == r_g - w + i - 1) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j < w; ++j) idx[j] = idx[j - 1] + 1;
        }
    }
    std::ostringstream os;
    os << "all h_m-closed edge sets of weight < " << d_r << " are s-bounded";
    return {true, BitVector(r_g), os.str()};
}

} // namespace qsurgery
