#include "qsurgery/bitmatrix.hpp"

#include <bit>
#include <algorithm>
#include <stdexcept>

namespace qsurgery {

namespace {

void check(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
}

} // namespace

// ---------------------------------------------------------------- BitVector

BitVector BitVector::from_bits(std::initializer_list<int> bits) {
    BitVector v(bits.size());
    std::size_t i = 0;
    for (int b : bits) v.set(i++, b != 0);
    return v;
}

BitVector BitVector::from_bits(const std::vector<int>& bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) v.set(i, bits[i] != 0);
    return v;
}

bool BitVector::get(std::size_t i) const {
    check(i < n_, "bitvector: index out of range");
    return (w_[i >> 6] >> (i & 63)) & 1u;
}

void BitVector::set(std::size_t i, bool v) {
    check(i < n_, "bitvector: index out of range");
    std::uint64_t mask = std::uint64_t(1) << (i & 63);
    if (v) w_[i >> 6] |= mask; else w_[i >> 6] &= ~mask;
}

void BitVector::flip(std::size_t i) {
    check(i < n_, "bitvector: index out of range");
    w_[i >> 6] ^= std::uint64_t(1) << (i & 63);
}

void BitVector::clear() { std::fill(w_.begin(), w_.end(), 0); }

BitVector& BitVector::operator^=(const BitVector& o) {
    check(n_ == o.n_, "bitvector: xor size mismatch");
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
    return *this;
}

std::size_t BitVector::weight() const {
    std::size_t w = 0;
    for (std::uint64_t x : w_) w += std::popcount(x);
    return w;
}

bool BitVector::any() const {
    for (std::uint64_t x : w_) if (x) return true;
    return false;
}

bool BitVector::dot(const BitVector& o) const {
    check(n_ == o.n_, "bitvector: dot size mismatch");
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < w_.size(); ++i) acc ^= w_[i] & o.w_[i];
    return std::popcount(acc) & 1u;
}

std::string BitVector::to_string() const {
    std::string s(n_, '0');
    for (std::size_t i = 0; i < n_; ++i) if (get(i)) s[i] = '1';
    return s;
}

// ---------------------------------------------------------------- BitMatrix

BitMatrix BitMatrix::identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

BitMatrix BitMatrix::from_rows(std::initializer_list<std::initializer_list<int>> rows) {
    std::vector<std::vector<int>> v;
    for (const auto& r : rows) v.emplace_back(r);
    return from_rows(v);
}

BitMatrix BitMatrix::from_rows(const std::vector<std::vector<int>>& rows) {
    std::size_t nr = rows.size();
    std::size_t nc = nr ? rows[0].size() : 0;
    for (const auto& r : rows) check(r.size() == nc, "bitmatrix: ragged rows");
    BitMatrix m(nr, nc);
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t c = 0; c < nc; ++c)
            if (rows[r][c]) m.set(r, c, true);
    return m;
}

BitMatrix BitMatrix::row_vector(const BitVector& v) {
    BitMatrix m(1, v.size());
    auto dst = m.row_words(0);
    auto src = v.words();
    std::copy(src.begin(), src.end(), dst.begin());
    return m;
}

bool BitMatrix::get(std::size_t r, std::size_t c) const {
    check(r < rows_ && c < cols_, "bitmatrix: index out of range");
    return (bits_[r * wpr_ + (c >> 6)] >> (c & 63)) & 1u;
}

void BitMatrix::set(std::size_t r, std::size_t c, bool v) {
    check(r < rows_ && c < cols_, "bitmatrix: index out of range");
    std::uint64_t mask = std::uint64_t(1) << (c & 63);
    if (v) bits_[r * wpr_ + (c >> 6)] |= mask; else bits_[r * wpr_ + (c >> 6)] &= ~mask;
}

void BitMatrix::flip(std::size_t r, std::size_t c) {
    check(r < rows_ && c < cols_, "bitmatrix: index out of range");
    bits_[r * wpr_ + (c >> 6)] ^= std::uint64_t(1) << (c & 63);
}

std::span<const std::uint64_t> BitMatrix::row_words(std::size_t r) const {
    check(r < rows_, "bitmatrix: row out of range");
    return {bits_.data() + r * wpr_, wpr_};
}

std::span<std::uint64_t> BitMatrix::row_words(std::size_t r) {
    check(r < rows_, "bitmatrix: row out of range");
    return {bits_.data() + r * wpr_, wpr_};
}

BitVector BitMatrix::row(std::size_t r) const {
    BitVector v(cols_);
    auto src = row_words(r);
    std::copy(src.begin(), src.end(), v.words().begin());
    return v;
}

BitVector BitMatrix::col(std::size_t c) const {
    BitVector v(rows_);
    for (std::size_t r = 0; r < rows_; ++r) if (get(r, c)) v.set(r, true);
    return v;
}

void BitMatrix::set_row(std::size_t r, const BitVector& v) {
    check(v.size() == cols_, "bitmatrix: set_row size mismatch");
    auto dst = row_words(r);
    auto src = v.words();
    std::copy(src.begin(), src.end(), dst.begin());
}

void BitMatrix::xor_rows(std::size_t r, std::size_t s) {
    check(r < rows_ && s < rows_, "bitmatrix: row out of range");
    for (std::size_t w = 0; w < wpr_; ++w) bits_[r * wpr_ + w] ^= bits_[s * wpr_ + w];
}

void BitMatrix::xor_row(std::size_t r, const BitVector& v) {
    check(v.size() == cols_, "bitmatrix: xor_row size mismatch");
    auto dst = row_words(r);
    auto src = v.words();
    for (std::size_t w = 0; w < wpr_; ++w) dst[w] ^= src[w];
}

void BitMatrix::swap_rows(std::size_t r, std::size_t s) {
    check(r < rows_ && s < rows_, "bitmatrix: row out of range");
    if (r == s) return;
    for (std::size_t w = 0; w < wpr_; ++w)
        std::swap(bits_[r * wpr_ + w], bits_[s * wpr_ + w]);
}

bool BitMatrix::is_zero() const {
    for (std::uint64_t x : bits_) if (x) return false;
    return true;
}

BitMatrix BitMatrix::mul(const BitMatrix& o) const {
    check(cols_ == o.rows_, "bitmatrix: mul dimension mismatch");
    BitMatrix out(rows_, o.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        auto dst = out.row_words(r);
        auto src = row_words(r);
        for (std::size_t w = 0; w < wpr_; ++w) {
            std::uint64_t bitsw = src[w];
            while (bitsw) {
                std::size_t k = (w << 6) + std::countr_zero(bitsw);
                bitsw &= bitsw - 1;
                auto br = o.row_words(k);
                for (std::size_t j = 0; j < o.wpr_; ++j) dst[j] ^= br[j];
            }
        }
    }
    return out;
}

BitMatrix BitMatrix::add(const BitMatrix& o) const {
    check(rows_ == o.rows_ && cols_ == o.cols_, "bitmatrix: add dimension mismatch");
    BitMatrix out = *this;
    for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] ^= o.bits_[i];
    return out;
}

BitMatrix BitMatrix::transposed() const {
    BitMatrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        auto src = row_words(r);
        for (std::size_t w = 0; w < wpr_; ++w) {
            std::uint64_t bitsw = src[w];
            while (bitsw) {
                std::size_t c = (w << 6) + std::countr_zero(bitsw);
                bitsw &= bitsw - 1;
                out.set(c, r, true);
            }
        }
    }
    return out;
}

BitVector BitMatrix::mul_vec(const BitVector& v) const {
    check(v.size() == cols_, "bitmatrix: mul_vec size mismatch");
    BitVector out(rows_);
    auto vw = v.words();
    for (std::size_t r = 0; r < rows_; ++r) {
        auto rw = row_words(r);
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < wpr_; ++w) acc ^= rw[w] & vw[w];
        if (std::popcount(acc) & 1u) out.set(r, true);
    }
    return out;
}

BitVector BitMatrix::vec_mul(const BitVector& v) const {
    check(v.size() == rows_, "bitmatrix: vec_mul size mismatch");
    BitVector out(cols_);
    auto ow = out.words();
    auto vw = v.words();
    for (std::size_t w = 0; w < vw.size(); ++w) {
        std::uint64_t bitsw = vw[w];
        while (bitsw) {
            std::size_t r = (w << 6) + std::countr_zero(bitsw);
            bitsw &= bitsw - 1;
            auto rw = row_words(r);
            for (std::size_t j = 0; j < wpr_; ++j) ow[j] ^= rw[j];
        }
    }
    return out;
}

BitMatrix BitMatrix::select_rows(const std::vector<std::size_t>& idx) const {
    BitMatrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        check(idx[i] < rows_, "bitmatrix: select_rows index out of range");
        auto src = row_words(idx[i]);
        auto dst = out.row_words(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

BitMatrix BitMatrix::select_cols(const std::vector<std::size_t>& idx) const {
    BitMatrix out(rows_, idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        check(idx[i] < cols_, "bitmatrix: select_cols index out of range");
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t i = 0; i < idx.size(); ++i)
            if (get(r, idx[i])) out.set(r, i, true);
    return out;
}

BitMatrix BitMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    check(r0 + nr <= rows_ && c0 + nc <= cols_, "bitmatrix: block out of range");
    BitMatrix out(nr, nc);
    for (std::size_t r = 0; r < nr; ++r)
        for (std::size_t c = 0; c < nc; ++c)
            if (get(r0 + r, c0 + c)) out.set(r, c, true);
    return out;
}

std::size_t BitMatrix::rank() const { return rref(*this).rank; }

std::string BitMatrix::to_string() const {
    std::string s;
    s.reserve(rows_ * (cols_ + 1));
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) s += get(r, c) ? '1' : '0';
        s += '\n';
    }
    return s;
}

// ------------------------------------------------------------ free functions

BitMatrix vstack(const BitMatrix& a, const BitMatrix& b) {
    if (a.rows() == 0 && a.cols() == 0) return b;
    if (b.rows() == 0 && b.cols() == 0) return a;
    check(a.cols() == b.cols(), "bitmatrix: vstack column mismatch");
    BitMatrix out(a.rows() + b.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto src = a.row_words(r); auto dst = out.row_words(r);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    for (std::size_t r = 0; r < b.rows(); ++r) {
        auto src = b.row_words(r); auto dst = out.row_words(a.rows() + r);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

BitMatrix hstack(const BitMatrix& a, const BitMatrix& b) {
    if (a.rows() == 0 && a.cols() == 0) return b;
    if (b.rows() == 0 && b.cols() == 0) return a;
    check(a.rows() == b.rows(), "bitmatrix: hstack row mismatch");
    BitMatrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) if (a.get(r, c)) out.set(r, c, true);
        for (std::size_t c = 0; c < b.cols(); ++c) if (b.get(r, c)) out.set(r, a.cols() + c, true);
    }
    return out;
}

BitMatrix kron(const BitMatrix& a, const BitMatrix& b) {
    BitMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ar = 0; ar < a.rows(); ++ar)
        for (std::size_t ac = 0; ac < a.cols(); ++ac) {
            if (!a.get(ar, ac)) continue;
            for (std::size_t br = 0; br < b.rows(); ++br)
                for (std::size_t bc = 0; bc < b.cols(); ++bc)
                    if (b.get(br, bc))
                        out.set(ar * b.rows() + br, ac * b.cols() + bc, true);
        }
    return out;
}

BitMatrix direct_sum(const BitMatrix& a, const BitMatrix& b) {
    BitMatrix out(a.rows() + b.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c)
            if (a.get(r, c)) out.set(r, c, true);
    for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c)
            if (b.get(r, c)) out.set(a.rows() + r, a.cols() + c, true);
    return out;
}

RrefResult rref(const BitMatrix& m) {
    RrefResult res{m, {}, 0};
    BitMatrix& r = res.r;
    std::size_t pr = 0; // next pivot row
    for (std::size_t c = 0; c < m.cols() && pr < m.rows(); ++c) {
        std::size_t sel = pr;
        while (sel < m.rows() && !r.get(sel, c)) ++sel;
        if (sel == m.rows()) continue;
        r.swap_rows(pr, sel);
        for (std::size_t i = 0; i < m.rows(); ++i)
            if (i != pr && r.get(i, c)) r.xor_rows(i, pr);
        res.pivots.push_back(c);
        ++pr;
    }
    res.rank = pr;
    return res;
}

BitMatrix kernel_basis(const BitMatrix& m) {
    RrefResult r = rref(m);
    std::vector<bool> is_pivot(m.cols(), false);
    for (std::size_t p : r.pivots) is_pivot[p] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < m.cols(); ++c) if (!is_pivot[c]) free_cols.push_back(c);

    BitMatrix out(free_cols.size(), m.cols());
    for (std::size_t i = 0; i < free_cols.size(); ++i) {
        std::size_t f = free_cols[i];
        out.set(i, f, true);
        for (std::size_t pi = 0; pi < r.pivots.size(); ++pi)
            if (r.r.get(pi, f)) out.set(i, r.pivots[pi], true);
    }
    return out;
}

std::optional<BitMatrix> solve_right(const BitMatrix& a, const BitMatrix& b) {
    check(a.rows() == b.rows(), "bitmatrix: solve_right row mismatch");
    BitMatrix aug = hstack(a, b);
    RrefResult r = rref(aug);
    // Any pivot landing in the b-part means an inconsistent row 0 = 1.
    for (std::size_t p : r.pivots)
        if (p >= a.cols()) return std::nullopt;
    BitMatrix x(a.cols(), b.cols());
    for (std::size_t pi = 0; pi < r.pivots.size(); ++pi) {
        std::size_t var = r.pivots[pi];
        for (std::size_t c = 0; c < b.cols(); ++c)
            if (r.r.get(pi, a.cols() + c)) x.set(var, c, true);
    }
    return x;
}

std::optional<BitMatrix> solve_left(const BitMatrix& a, const BitMatrix& b) {
    check(a.cols() == b.cols(), "bitmatrix: solve_left column mismatch");
    auto xt = solve_right(a.transposed(), b.transposed());
    if (!xt) return std::nullopt;
    return xt->transposed();
}

std::optional<BitMatrix> right_inverse(const BitMatrix& a) {
    return solve_right(a, BitMatrix::identity(a.rows()));
}

bool in_rowspace(const BitMatrix& m, const BitVector& v) {
    check(v.size() == m.cols(), "bitmatrix: in_rowspace size mismatch");
    return solve_left(m, BitMatrix::row_vector(v)).has_value();
}

BitVector vec(const BitMatrix& m) {
    BitVector v(m.rows() * m.cols());
    for (std::size_t c = 0; c < m.cols(); ++c)
        for (std::size_t r = 0; r < m.rows(); ++r)
            if (m.get(r, c)) v.set(c * m.rows() + r, true);
    return v;
}

BitMatrix unvec(const BitVector& v, std::size_t rows, std::size_t cols) {
    check(v.size() == rows * cols, "bitmatrix: unvec size mismatch");
    BitMatrix m(rows, cols);
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t r = 0; r < rows; ++r)
            if (v.get(c * rows + r)) m.set(r, c, true);
    return m;
}

} // namespace qsurgery
