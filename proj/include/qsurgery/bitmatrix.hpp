#pragma once

#include <cstdint>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qsurgery {

/// Dense bit vector over GF(2), packed 64 bits per word.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    static BitVector from_bits(std::initializer_list<int> bits);
    static BitVector from_bits(const std::vector<int>& bits);

    std::size_t size() const { return n_; }
    bool empty() const { return n_ == 0; }

    bool get(std::size_t i) const;
    void set(std::size_t i, bool v);
    void flip(std::size_t i);
    void clear();

    BitVector& operator^=(const BitVector& o);
    friend BitVector operator^(BitVector a, const BitVector& b) { a ^= b; return a; }
    bool operator==(const BitVector& o) const = default;

    std::size_t weight() const;
    bool any() const;
    /// GF(2) inner product <this, o>.
    bool dot(const BitVector& o) const;

    std::span<const std::uint64_t> words() const { return w_; }
    std::span<std::uint64_t> words() { return w_; }

    std::string to_string() const; // e.g. "1011"

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

/// Dense matrix over GF(2), row-major, rows packed 64 bits per word.
/// All bits beyond `cols` in the last word of each row are kept zero.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), wpr_((cols + 63) / 64), bits_(rows * wpr_, 0) {}

    static BitMatrix identity(std::size_t n);
    static BitMatrix zero(std::size_t rows, std::size_t cols) { return BitMatrix(rows, cols); }
    static BitMatrix from_rows(std::initializer_list<std::initializer_list<int>> rows);
    static BitMatrix from_rows(const std::vector<std::vector<int>>& rows);
    /// Single-row matrix holding v.
    static BitMatrix row_vector(const BitVector& v);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t words_per_row() const { return wpr_; }

    bool get(std::size_t r, std::size_t c) const;
    void set(std::size_t r, std::size_t c, bool v);
    void flip(std::size_t r, std::size_t c);

    std::span<const std::uint64_t> row_words(std::size_t r) const;
    std::span<std::uint64_t> row_words(std::size_t r);

    BitVector row(std::size_t r) const;
    BitVector col(std::size_t c) const;
    void set_row(std::size_t r, const BitVector& v);
    /// row r ^= row s (same matrix).
    void xor_rows(std::size_t r, std::size_t s);
    /// row r ^= v.
    void xor_row(std::size_t r, const BitVector& v);
    void swap_rows(std::size_t r, std::size_t s);

    bool operator==(const BitMatrix& o) const = default;
    bool is_zero() const;

    /// Matrix product over GF(2); (r x c) * (c x m) -> (r x m).
    BitMatrix mul(const BitMatrix& o) const;
    friend BitMatrix operator*(const BitMatrix& a, const BitMatrix& b) { return a.mul(b); }
    /// Entrywise XOR; dimensions must match.
    BitMatrix add(const BitMatrix& o) const;
    friend BitMatrix operator+(const BitMatrix& a, const BitMatrix& b) { return a.add(b); }

    BitMatrix transposed() const;

    /// m * v^T as a length-rows vector.
    BitVector mul_vec(const BitVector& v) const;
    /// v * m as a length-cols vector.
    BitVector vec_mul(const BitVector& v) const;

    BitMatrix select_rows(const std::vector<std::size_t>& idx) const;
    BitMatrix select_cols(const std::vector<std::size_t>& idx) const;
    /// Contiguous block [r0, r0+nr) x [c0, c0+nc).
    BitMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;

    std::size_t rank() const;

    std::string to_string() const; // one line of 0/1 per row

private:
    std::size_t rows_ = 0, cols_ = 0, wpr_ = 0;
    std::vector<std::uint64_t> bits_;
};

/// Stack vertically: [a; b]. Column counts must match (or one side empty).
BitMatrix vstack(const BitMatrix& a, const BitMatrix& b);
/// Stack horizontally: [a | b]. Row counts must match (or one side empty).
BitMatrix hstack(const BitMatrix& a, const BitMatrix& b);
/// Kronecker product a (x) b.
BitMatrix kron(const BitMatrix& a, const BitMatrix& b);
/// Block-diagonal direct sum diag(a, b).
BitMatrix direct_sum(const BitMatrix& a, const BitMatrix& b);

/// Reduced row echelon form together with its pivot columns.
struct RrefResult {
    BitMatrix r;                      // RREF of the input
    std::vector<std::size_t> pivots;  // pivot column of each pivot row, ascending
    std::size_t rank = 0;
};
RrefResult rref(const BitMatrix& m);

/// Rows form a basis of the right kernel {v : m v^T = 0}. Deterministic order.
BitMatrix kernel_basis(const BitMatrix& m);

/// Solve a * x = b for x (a: r x n, b: r x m, x: n x m). Free variables are
/// set to zero, so the result is deterministic. nullopt if inconsistent.
std::optional<BitMatrix> solve_right(const BitMatrix& a, const BitMatrix& b);
/// Solve x * a = b for x (a: n x c, b: m x c, x: m x n).
std::optional<BitMatrix> solve_left(const BitMatrix& a, const BitMatrix& b);
/// r with a * r = identity(a.rows()); nullopt if a has deficient row rank.
std::optional<BitMatrix> right_inverse(const BitMatrix& a);
/// True when v lies in the row space of m.
bool in_rowspace(const BitMatrix& m, const BitVector& v);

/// Column-major vectorization: vec(m)[c * rows + r] = m[r, c]. With this
/// convention kron satisfies (A (x) B) vec(X) = vec(B X A^T).
BitVector vec(const BitMatrix& m);
BitMatrix unvec(const BitVector& v, std::size_t rows, std::size_t cols);

} // namespace qsurgery
