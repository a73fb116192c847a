#pragma once

#include <cstring>
#include <fstream>
#include <string>

#include "lowrank/harness/csv.hpp"
#include "lowrank/types.hpp"

namespace lowrank::harness {

// Text format: header line "d n", then d*n whitespace-separated values in
// column-major order. Binary format: 16-byte header (8-byte magic, uint32 d,
// uint32 n, little-endian) followed by d*n little-endian float64 values in
// column-major order.
inline constexpr char kMatrixMagic[8] = {'L', 'R', 'M', 'X', 'B', 'I', 'N', '1'};

inline void write_matrix_text(const std::string& path, const Matrix& M) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_matrix_text: cannot write '" + path + "'");
    out << M.rows() << ' ' << M.cols() << '\n';
    for (Index j = 0; j < M.cols(); ++j)
        for (Index i = 0; i < M.rows(); ++i) out << fmt_double(M(i, j)) << '\n';
}

inline Matrix read_matrix_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_matrix_text: cannot open '" + path + "'");
    Index d = 0, n = 0;
    if (!(in >> d >> n) || d < 1 || n < 1)
        throw std::runtime_error("read_matrix_text: malformed header in '" + path + "'");
    Matrix M(d, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < d; ++i)
            if (!(in >> M(i, j)))
                throw std::runtime_error("read_matrix_text: truncated data in '" + path + "'");
    return M;
}

inline void write_matrix_binary(const std::string& path, const Matrix& M) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_matrix_binary: cannot write '" + path + "'");
    const uint32_t d = static_cast<uint32_t>(M.rows());
    const uint32_t n = static_cast<uint32_t>(M.cols());
    out.write(kMatrixMagic, sizeof(kMatrixMagic));
    out.write(reinterpret_cast<const char*>(&d), sizeof(d));
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(M.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(M.size())));
}

inline Matrix read_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_matrix_binary: cannot open '" + path + "'");
    char magic[8];
    uint32_t d = 0, n = 0;
    in.read(magic, sizeof(magic));
    in.read(reinterpret_cast<char*>(&d), sizeof(d));
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!in || std::memcmp(magic, kMatrixMagic, sizeof(magic)) != 0)
        throw std::runtime_error("read_matrix_binary: bad header in '" + path + "'");
    if (d < 1 || n < 1) throw std::runtime_error("read_matrix_binary: bad dimensions in '" + path + "'");
    Matrix M(static_cast<Index>(d), static_cast<Index>(n));
    in.read(reinterpret_cast<char*>(M.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(M.size())));
    if (!in) throw std::runtime_error("read_matrix_binary: truncated data in '" + path + "'");
    return M;
}

} // namespace lowrank::harness
