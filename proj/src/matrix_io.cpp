#include "qsurgery/matrix_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qsurgery {

namespace {

bool next_content_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        std::size_t i = line.find_first_not_of(" \t\r");
        if (i == std::string::npos || line[i] == '#') continue;
        return true;
    }
    return false;
}

} // namespace

BitMatrix read_matrix_text(std::istream& in) {
    std::string line;
    if (!next_content_line(in, line))
        throw std::runtime_error("matrix text: missing header line");
    std::istringstream hdr(line);
    long long rows = -1, cols = -1;
    if (!(hdr >> rows >> cols) || rows < 0 || cols < 0)
        throw std::runtime_error("matrix text: bad header '" + line + "'");
    BitMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    while (next_content_line(in, line)) {
        std::istringstream ls(line);
        long long r = -1, c = -1;
        if (!(ls >> r >> c))
            throw std::runtime_error("matrix text: bad entry '" + line + "'");
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw std::runtime_error("matrix text: entry out of range '" + line + "'");
        m.set(static_cast<std::size_t>(r), static_cast<std::size_t>(c), true);
    }
    return m;
}

BitMatrix read_matrix_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("matrix text: cannot open " + path);
    return read_matrix_text(f);
}

void write_matrix_text(std::ostream& out, const BitMatrix& m) {
    out << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            if (m.get(r, c)) out << r << ' ' << c << '\n';
}

void write_matrix_file(const std::string& path, const BitMatrix& m) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("matrix text: cannot open " + path);
    write_matrix_text(f, m);
    if (!f) throw std::runtime_error("matrix text: write failed for " + path);
}

} // namespace qsurgery
