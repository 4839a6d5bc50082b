#pragma once

#include <Eigen/Core>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "stentx/error.hpp"

namespace stentx::binio {

static_assert(std::endian::native == std::endian::little, "model files are little-endian");

inline void put_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }
inline void put_i64(std::ostream& out, std::int64_t v) { put_u64(out, static_cast<std::uint64_t>(v)); }
inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
inline void put_str(std::ostream& out, const std::string& s) {
    put_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline void put_strs(std::ostream& out, const std::vector<std::string>& v) {
    put_u64(out, v.size());
    for (const auto& s : v) put_str(out, s);
}
inline void put_vec(std::ostream& out, const Eigen::VectorXd& v) {
    put_u64(out, static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v(i));
}
inline void put_mat(std::ostream& out, const Eigen::MatrixXd& m) {
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) put_f64(out, m(i, j));
}
inline void put_doubles(std::ostream& out, const std::vector<double>& v) {
    put_u64(out, v.size());
    for (double d : v) put_f64(out, d);
}

inline std::uint64_t get_u64(std::istream& in) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("truncated model file");
    return v;
}
inline std::int64_t get_i64(std::istream& in) { return static_cast<std::int64_t>(get_u64(in)); }
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }
inline std::uint64_t get_size(std::istream& in, std::uint64_t limit = 1ULL << 32) {
    const auto n = get_u64(in);
    if (n > limit) throw DataError("corrupt model file (length " + std::to_string(n) + ")");
    return n;
}
inline std::string get_str(std::istream& in) {
    std::string s(get_size(in, 1 << 20), '\0');
    if (!in.read(s.data(), static_cast<std::streamsize>(s.size()))) throw DataError("truncated model file");
    return s;
}
inline std::vector<std::string> get_strs(std::istream& in) {
    std::vector<std::string> v(get_size(in, 1 << 20));
    for (auto& s : v) s = get_str(in);
    return v;
}
inline Eigen::VectorXd get_vec(std::istream& in) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(get_size(in)));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = get_f64(in);
    return v;
}
inline Eigen::MatrixXd get_mat(std::istream& in) {
    const auto r = static_cast<Eigen::Index>(get_size(in));
    const auto c = static_cast<Eigen::Index>(get_size(in));
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = get_f64(in);
    return m;
}
inline std::vector<double> get_doubles(std::istream& in) {
    std::vector<double> v(get_size(in));
    for (auto& d : v) d = get_f64(in);
    return v;
}

}  // namespace stentx::binio
