#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsurgery/bitmatrix.hpp"
#include "qsurgery/matrix_io.hpp"

#include <random>
#include <sstream>

using namespace qsurgery;

namespace {

BitMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                        double density = 0.5) {
    BitMatrix m(rows, cols);
    std::bernoulli_distribution bit(density);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (bit(rng)) m.set(r, c, true);
    return m;
}

} // namespace

TEST_CASE("rank of known matrices") {
    CHECK(BitMatrix::from_rows({{1, 1}, {1, 1}}).rank() == 1);
    CHECK(BitMatrix::identity(5).rank() == 5);
    CHECK(BitMatrix::zero(3, 4).rank() == 0);
    CHECK(BitMatrix::from_rows({{1, 0, 1}, {0, 1, 1}, {1, 1, 0}}).rank() == 2);
}

TEST_CASE("kernel basis of the 3-bit chain") {
    BitMatrix h = BitMatrix::from_rows({{1, 1, 0}, {0, 1, 1}});
    BitMatrix k = kernel_basis(h);
    REQUIRE(k.rows() == 1);
    CHECK(k.row(0) == BitVector::from_bits({1, 1, 1}));
    CHECK(!h.mul(k.transposed()).is_zero() == false);
}

TEST_CASE("right inverse of an upper triangular matrix is itself") {
    BitMatrix a = BitMatrix::from_rows({{1, 1}, {0, 1}});
    auto r = right_inverse(a);
    REQUIRE(r.has_value());
    CHECK(*r == a);
    CHECK(a.mul(*r) == BitMatrix::identity(2));
}

TEST_CASE("kron of identity and a row") {
    BitMatrix e2 = BitMatrix::identity(2);
    BitMatrix row = BitMatrix::from_rows({{1, 1}});
    BitMatrix k = kron(e2, row);
    CHECK(k == BitMatrix::from_rows({{1, 1, 0, 0}, {0, 0, 1, 1}}));
}

TEST_CASE("solve_right finds solutions and reports inconsistency") {
    BitMatrix a = BitMatrix::from_rows({{1, 1, 0}, {0, 1, 1}});
    BitMatrix b = BitMatrix::from_rows({{1}, {0}});
    auto x = solve_right(a, b);
    REQUIRE(x.has_value());
    CHECK(a.mul(*x) == b);

    // 0 = 1 row makes the system inconsistent.
    BitMatrix a2 = BitMatrix::from_rows({{1, 1}, {1, 1}});
    BitMatrix b2 = BitMatrix::from_rows({{1}, {0}});
    CHECK(!solve_right(a2, b2).has_value());
}

TEST_CASE("solve_right is deterministic with free variables zeroed") {
    BitMatrix a = BitMatrix::from_rows({{1, 0, 1, 0}, {0, 1, 1, 0}});
    BitMatrix b = BitMatrix::from_rows({{1}, {1}});
    auto x1 = solve_right(a, b);
    auto x2 = solve_right(a, b);
    REQUIRE(x1.has_value());
    CHECK(*x1 == *x2);
    // Columns 2 and 3 are free, so they must be zero in the solution.
    CHECK(!x1->get(2, 0));
    CHECK(!x1->get(3, 0));
}

TEST_CASE("rank-nullity over random matrices") {
    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t rows = 1 + rng() % 10, cols = 1 + rng() % 12;
        BitMatrix m = random_matrix(rng, rows, cols);
        BitMatrix k = kernel_basis(m);
        CHECK(m.rank() + k.rows() == cols);
        if (k.rows() > 0) CHECK(m.mul(k.transposed()).is_zero());
        CHECK(k.rank() == k.rows()); // basis rows independent
    }
}

TEST_CASE("right_inverse round trips on full-row-rank matrices") {
    std::mt19937_64 rng(999);
    int found = 0;
    for (int trial = 0; trial < 100 && found < 20; ++trial) {
        std::size_t rows = 1 + rng() % 6;
        std::size_t cols = rows + rng() % 6;
        BitMatrix m = random_matrix(rng, rows, cols);
        if (m.rank() != rows) continue;
        ++found;
        auto r = right_inverse(m);
        REQUIRE(r.has_value());
        CHECK(m.mul(*r) == BitMatrix::identity(rows));
    }
    CHECK(found >= 10);
}

TEST_CASE("vec follows the column-major Kronecker identity") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 20; ++trial) {
        BitMatrix a = random_matrix(rng, 2 + rng() % 3, 2 + rng() % 3);
        BitMatrix b = random_matrix(rng, 2 + rng() % 3, 2 + rng() % 3);
        BitMatrix x = random_matrix(rng, b.cols(), a.cols());
        // (A (x) B) vec(X) = vec(B X A^T)
        BitVector lhs = kron(a, b).mul_vec(vec(x));
        BitVector rhs = vec(b.mul(x).mul(a.transposed()));
        CHECK(lhs == rhs);
    }
}

TEST_CASE("vec and unvec round trip") {
    std::mt19937_64 rng(31);
    BitMatrix m = random_matrix(rng, 5, 7);
    CHECK(unvec(vec(m), 5, 7) == m);
}

TEST_CASE("transpose is an involution and respects products") {
    std::mt19937_64 rng(4242);
    BitMatrix a = random_matrix(rng, 6, 4);
    BitMatrix b = random_matrix(rng, 4, 5);
    CHECK(a.transposed().transposed() == a);
    CHECK(a.mul(b).transposed() == b.transposed().mul(a.transposed()));
}

TEST_CASE("direct_sum and stacking shapes") {
    BitMatrix a = BitMatrix::identity(2);
    BitMatrix b = BitMatrix::from_rows({{1, 1, 1}});
    BitMatrix d = direct_sum(a, b);
    CHECK(d.rows() == 3);
    CHECK(d.cols() == 5);
    CHECK(d.get(0, 0));
    CHECK(d.get(2, 2));
    CHECK(d.get(2, 4));
    CHECK(vstack(a, BitMatrix::from_rows({{1, 0}})).rows() == 3);
    CHECK(hstack(a, b.transposed().block(0, 0, 2, 1)).cols() == 3);
}

TEST_CASE("mul_vec and vec_mul agree with explicit products") {
    std::mt19937_64 rng(88);
    BitMatrix m = random_matrix(rng, 7, 9);
    BitVector v = random_matrix(rng, 1, 9).row(0);
    BitVector u = random_matrix(rng, 1, 7).row(0);
    CHECK(m.mul_vec(v) == m.mul(BitMatrix::row_vector(v).transposed()).col(0));
    CHECK(m.vec_mul(u) == BitMatrix::row_vector(u).mul(m).row(0));
}

TEST_CASE("in_rowspace") {
    BitMatrix m = BitMatrix::from_rows({{1, 1, 0}, {0, 1, 1}});
    CHECK(in_rowspace(m, BitVector::from_bits({1, 0, 1})));
    CHECK(!in_rowspace(m, BitVector::from_bits({1, 0, 0})));
    CHECK(in_rowspace(m, BitVector::from_bits({0, 0, 0})));
}

TEST_CASE("matrix text format round trips") {
    std::mt19937_64 rng(2024);
    BitMatrix m = random_matrix(rng, 6, 11, 0.3);
    std::stringstream ss;
    write_matrix_text(ss, m);
    BitMatrix back = read_matrix_text(ss);
    CHECK(back == m);

    std::stringstream bad("2 2\n3 0\n");
    CHECK_THROWS(read_matrix_text(bad));

    std::stringstream commented("# header next\n2 3\n\n0 2\n# done\n1 0\n");
    BitMatrix c = read_matrix_text(commented);
    CHECK(c.get(0, 2));
    CHECK(c.get(1, 0));
    CHECK(c.rows() == 2);
}
