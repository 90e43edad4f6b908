#include "qsurgery/css.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>
#include <stdexcept>

namespace qsurgery {

namespace {

/// Incremental GF(2) row basis (echelon form by lowest set bit).
class EchelonBasis {
public:
    /// Reduce v against stored rows; store the residual if nonzero.
    /// Returns true when v extended the basis.
    bool insert(BitVector v) {
        reduce(v);
        if (!v.any()) return false;
        lead_.push_back(first_bit(v));
        rows_.push_back(std::move(v));
        return true;
    }

    bool contains(BitVector v) const {
        reduce(v);
        return !v.any();
    }

    std::size_t rank() const { return rows_.size(); }

private:
    static std::size_t first_bit(const BitVector& v) {
        auto w = v.words();
        for (std::size_t i = 0; i < w.size(); ++i)
            if (w[i]) return (i << 6) + std::countr_zero(w[i]);
        return v.size();
    }

    void reduce(BitVector& v) const {
        for (std::size_t i = 0; i < rows_.size(); ++i)
            if (v.get(lead_[i])) v ^= rows_[i];
    }

    std::vector<BitVector> rows_;
    std::vector<std::size_t> lead_;
};

BitMatrix cyclic_shift(std::size_t l, std::size_t a) {
    BitMatrix s(l, l);
    for (std::size_t i = 0; i < l; ++i) s.set(i, (i + a) % l, true);
    return s;
}

} // namespace

std::vector<std::string> CssCode::validate() const {
    std::vector<std::string> bad;
    std::size_t nn = h_x.cols();
    auto dim_ok = [&](const BitMatrix& m, const char* name) {
        if (m.cols() != nn) {
            std::ostringstream os;
            os << name << " has " << m.cols() << " columns, expected " << nn;
            bad.push_back(os.str());
            return false;
        }
        return true;
    };
    bool dims = dim_ok(h_z, "h_z") && dim_ok(j_x, "j_x") && dim_ok(j_z, "j_z");
    if (!dims) return bad;

    if (j_x.rows() != j_z.rows())
        bad.push_back("j_x and j_z disagree on the logical count");
    if (!h_x.mul(h_z.transposed()).is_zero())
        bad.push_back("h_x h_z^T != 0");
    if (!h_x.mul(j_z.transposed()).is_zero())
        bad.push_back("h_x j_z^T != 0");
    if (!h_z.mul(j_x.transposed()).is_zero())
        bad.push_back("h_z j_x^T != 0");
    if (j_x.mul(j_z.transposed()) != BitMatrix::identity(j_x.rows()))
        bad.push_back("j_x j_z^T != identity");
    std::size_t expected_k = nn - h_x.rank() - h_z.rank();
    if (j_x.rows() != expected_k) {
        std::ostringstream os;
        os << "logical count " << j_x.rows() << " != n - rank(h_x) - rank(h_z) = "
           << expected_k;
        bad.push_back(os.str());
    }
    return bad;
}

void CssCode::ensure_valid(const std::string& context) const {
    auto bad = validate();
    if (bad.empty()) return;
    std::string msg = context + ": invalid css code:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw std::runtime_error(msg);
}

BitMatrix make_repetition_chain(std::size_t d) {
    if (d == 0) throw std::invalid_argument("repetition chain: d must be >= 1");
    BitMatrix h(d - 1, d);
    for (std::size_t i = 0; i + 1 < d; ++i) {
        h.set(i, i, true);
        h.set(i, i + 1, true);
    }
    return h;
}

CssCode make_surface(std::size_t d) {
    if (d < 2) throw std::invalid_argument("surface code: d must be >= 2");
    std::size_t g = 2 * d - 1;
    // Qubits sit on grid points with even coordinate sum.
    std::vector<std::vector<int>> qubit(g, std::vector<int>(g, -1));
    int nq = 0;
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            if ((i + j) % 2 == 0) qubit[i][j] = nq++;

    auto neighbors = [&](std::size_t i, std::size_t j) {
        std::vector<int> out;
        if (i > 0) out.push_back(qubit[i - 1][j]);
        if (i + 1 < g) out.push_back(qubit[i + 1][j]);
        if (j > 0) out.push_back(qubit[i][j - 1]);
        if (j + 1 < g) out.push_back(qubit[i][j + 1]);
        return out;
    };

    std::vector<std::vector<int>> x_rows, z_rows;
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j) {
            if ((i + j) % 2 == 0) continue;
            std::vector<int> row(nq, 0);
            for (int q : neighbors(i, j)) row[q] = 1;
            if (i % 2 == 0) x_rows.push_back(row); else z_rows.push_back(row);
        }

    CssCode code;
    code.h_x = BitMatrix::from_rows(x_rows);
    code.h_z = BitMatrix::from_rows(z_rows);
    code.j_z = BitMatrix(1, nq);
    for (std::size_t j = 0; j < g; j += 2) code.j_z.set(0, qubit[0][j], true);
    code.j_x = BitMatrix(1, nq);
    for (std::size_t i = 0; i < g; i += 2) code.j_x.set(0, qubit[i][0], true);
    code.ensure_valid("make_surface");
    return code;
}

CssCode make_bivariate_bicycle(std::size_t l, std::size_t m,
                               const std::vector<BBTerm>& a_terms,
                               const std::vector<BBTerm>& b_terms) {
    if (l == 0 || m == 0)
        throw std::invalid_argument("bivariate bicycle: l and m must be >= 1");
    auto build = [&](const std::vector<BBTerm>& terms) {
        std::set<std::pair<std::size_t, std::size_t>> seen;
        BitMatrix acc(l * m, l * m);
        for (const BBTerm& t : terms) {
            auto key = std::make_pair(t.a % l, t.b % m);
            if (!seen.insert(key).second)
                throw std::invalid_argument("bivariate bicycle: repeated monomial");
            acc = acc + kron(cyclic_shift(l, key.first), cyclic_shift(m, key.second));
        }
        return acc;
    };
    BitMatrix a = build(a_terms), b = build(b_terms);
    CssCode code;
    code.h_x = hstack(a, b);
    code.h_z = hstack(b.transposed(), a.transposed());
    std::tie(code.j_x, code.j_z) = derive_logicals(code.h_x, code.h_z);
    code.ensure_valid("make_bivariate_bicycle");
    return code;
}

CssCode make_composite(const CssCode& reg, const CssCode& noisy, std::size_t q) {
    reg.ensure_valid("make_composite register");
    noisy.ensure_valid("make_composite noisy block");
    CssCode code;
    code.h_x = reg.h_x;
    code.h_z = reg.h_z;
    for (std::size_t b = 0; b < q; ++b) {
        code.h_x = direct_sum(code.h_x, noisy.h_x);
        code.h_z = direct_sum(code.h_z, noisy.h_z);
    }
    std::size_t n = reg.n() + q * noisy.n();
    std::size_t k = reg.k() + q * noisy.k();
    code.j_x = BitMatrix(k, n);
    code.j_z = BitMatrix(k, n);
    auto paste = [](BitMatrix& dst, const BitMatrix& src, std::size_t r0, std::size_t c0) {
        for (std::size_t r = 0; r < src.rows(); ++r)
            for (std::size_t c = 0; c < src.cols(); ++c)
                if (src.get(r, c)) dst.set(r0 + r, c0 + c, true);
    };
    paste(code.j_x, reg.j_x, 0, 0);
    paste(code.j_z, reg.j_z, 0, 0);
    for (std::size_t b = 0; b < q; ++b) {
        std::size_t r0 = reg.k() + b * noisy.k();
        std::size_t c0 = reg.n() + b * noisy.n();
        paste(code.j_x, noisy.j_x, r0, c0);
        paste(code.j_z, noisy.j_z, r0, c0);
    }
    code.ensure_valid("make_composite");
    return code;
}

std::pair<BitMatrix, BitMatrix> derive_logicals(const BitMatrix& h_x, const BitMatrix& h_z) {
    if (h_x.cols() != h_z.cols())
        throw std::invalid_argument("derive_logicals: column mismatch");
    std::size_t n = h_x.cols();
    if (!h_x.mul(h_z.transposed()).is_zero())
        throw std::invalid_argument("derive_logicals: h_x h_z^T != 0");
    std::size_t k = n - h_x.rank() - h_z.rank();
    if (k == 0) return {BitMatrix(0, n), BitMatrix(0, n)};

    // Z logicals: kernel of h_x beyond the row space of h_z.
    auto select = [&](const BitMatrix& hker, const BitMatrix& hrows) {
        EchelonBasis basis;
        for (std::size_t r = 0; r < hrows.rows(); ++r) basis.insert(hrows.row(r));
        BitMatrix ker = kernel_basis(hker);
        std::vector<std::size_t> idx;
        for (std::size_t r = 0; r < ker.rows(); ++r)
            if (basis.insert(ker.row(r))) idx.push_back(r);
        return ker.select_rows(idx);
    };
    BitMatrix jz_cand = select(h_x, h_z);
    BitMatrix jx_cand = select(h_z, h_x);
    if (jz_cand.rows() != k || jx_cand.rows() != k)
        throw std::runtime_error("derive_logicals: logical selection failed");

    BitMatrix m = jx_cand.mul(jz_cand.transposed());
    auto minv = right_inverse(m);
    if (!minv)
        throw std::runtime_error("derive_logicals: pairing matrix not invertible");
    return {minv->mul(jx_cand), jz_cand};
}

namespace {

/// Weight-ordered support enumeration: find whether some v of weight exactly
/// w has syndrome 0 on the first `nh` bits and nonzero on the rest. Columns
/// are the stacked per-qubit syndromes.
class SupportSearch {
public:
    SupportSearch(const BitMatrix& h, const BitMatrix& j)
        : n_(h.cols()), nh_(h.rows()), nj_(j.rows()), words_((nh_ + nj_ + 63) / 64) {
        cols_.assign(n_ * words_, 0);
        for (std::size_t c = 0; c < n_; ++c) {
            for (std::size_t r = 0; r < nh_; ++r)
                if (h.get(r, c)) cols_[c * words_ + (r >> 6)] ^= std::uint64_t(1) << (r & 63);
            for (std::size_t r = 0; r < nj_; ++r) {
                std::size_t bit = nh_ + r;
                if (j.get(r, c)) cols_[c * words_ + (bit >> 6)] ^= std::uint64_t(1) << (bit & 63);
            }
        }
        hmask_.assign(words_, 0);
        for (std::size_t b = 0; b < nh_; ++b) hmask_[b >> 6] |= std::uint64_t(1) << (b & 63);
    }

    bool exists_logical_of_weight(std::size_t w) {
        acc_.assign(words_, 0);
        return recurse(0, w);
    }

private:
    bool leaf_ok() const {
        bool j_any = false;
        for (std::size_t i = 0; i < words_; ++i) {
            if (acc_[i] & hmask_[i]) return false;
            if (acc_[i] & ~hmask_[i]) j_any = true;
        }
        return j_any;
    }

    bool recurse(std::size_t start, std::size_t remaining) {
        if (remaining == 0) return leaf_ok();
        for (std::size_t c = start; c + remaining <= n_; ++c) {
            const std::uint64_t* col = &cols_[c * words_];
            for (std::size_t i = 0; i < words_; ++i) acc_[i] ^= col[i];
            if (recurse(c + 1, remaining - 1)) return true;
            for (std::size_t i = 0; i < words_; ++i) acc_[i] ^= col[i];
        }
        return false;
    }

    std::size_t n_, nh_, nj_, words_;
    std::vector<std::uint64_t> cols_;
    std::vector<std::uint64_t> hmask_;
    std::vector<std::uint64_t> acc_;
};

} // namespace

DistanceResult exact_code_distance(const CssCode& code, PauliBasis basis, std::size_t cap) {
    if (code.k() == 0) return {DistanceKind::infinite, 0};
    const BitMatrix& h = basis == PauliBasis::x ? code.h_z : code.h_x;
    const BitMatrix& j = basis == PauliBasis::x ? code.j_z : code.j_x;
    SupportSearch search(h, j);
    for (std::size_t w = 1; w <= cap; ++w)
        if (search.exists_logical_of_weight(w)) return {DistanceKind::found, w};
    return {DistanceKind::above_cap, 0};
}

BitVector reduce_logical_weight(const BitVector& logical, const BitMatrix& stab,
                                std::size_t guard_log2) {
    if (stab.cols() != logical.size())
        throw std::invalid_argument("reduce_logical_weight: size mismatch");
    RrefResult r = rref(stab);
    if (r.rank >= guard_log2)
        throw std::runtime_error("reduce_logical_weight: coset too large to enumerate");
    std::vector<BitVector> basis;
    for (std::size_t i = 0; i < r.rank; ++i) basis.push_back(r.r.row(i));

    BitVector cur = logical, best = logical;
    std::size_t best_w = logical.weight();
    std::uint64_t total = std::uint64_t(1) << r.rank;
    for (std::uint64_t g = 1; g < total; ++g) {
        cur ^= basis[std::countr_zero(g)]; // Gray-code walk of the coset
        std::size_t w = cur.weight();
        if (w < best_w) { best_w = w; best = cur; }
    }
    return best;
}

} // namespace qsurgery
