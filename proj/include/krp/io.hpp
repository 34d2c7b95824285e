#pragma once

// Binary file formats. All integers are unsigned little-endian, all scalars
// little-endian IEEE-754 binary64, all payloads first-index-fastest.
//
//   KTEN  dense tensor   "KTEN" u8 version=1, u8 dtype=0, u8 order d, u8 0,
//                        d x u64 dims, prod(dims) x f64
//   KTUC  Tucker tensor  "KTUC" u8 version=1, u8 dtype=0, u8 order d, u8 0,
//                        d x u64 core dims, d x u64 factor rows,
//                        d x u8 orthonormal flags, core f64, factor f64 in
//                        mode order (each column-major)
//   KBLK  block matrix   "KBLK" u8 version=1, u8 dtype=0, u8 0, u8 0,
//                        u64 t, p, q, m, n, then per term u64 count,
//                        count x (u64 row, u64 col), m*n x f64 block
//
// Matrices are stored as order-2 KTEN files and Markov sequences as the
// order-3 KTEN tensor m x n x 2s with H_k in slice k.
//
// Writes go to a temporary file in the target directory that is renamed over
// the target, so readers never see a partial file.

#include "krp/block_structured.hpp"
#include "krp/era.hpp"
#include "krp/tucker.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string_view>

namespace krp {

namespace io_detail {

constexpr std::uint8_t version = 1;
constexpr std::uint8_t dtype_f64 = 0;
// guards against absurd headers before anything is allocated
constexpr std::uint64_t max_elements = std::uint64_t{1} << 36;

class Writer {
 public:
  void bytes(std::string_view s) { buf_.append(s); }
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(const double* p, std::size_t n) {
    buf_.reserve(buf_.size() + 8 * n);
    for (std::size_t k = 0; k < n; ++k) f64(p[k]);
  }
  const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(std::string data, std::string path) : data_(std::move(data)), path_(std::move(path)) {}

  void magic(std::string_view m) {
    if (data_.compare(0, m.size(), m) != 0) fail("bad magic, expected " + std::string(m));
    pos_ += m.size();
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  void f64s(double* out, std::uint64_t n) {
    if (n > (data_.size() - pos_) / 8) fail("truncated payload");
    for (std::uint64_t k = 0; k < n; ++k) out[k] = f64();
  }
  Index dim() {
    const std::uint64_t v = u64();
    if (v == 0 || v > max_elements) fail("dimension out of range: " + std::to_string(v));
    return static_cast<Index>(v);
  }
  void header(std::string_view m) {
    magic(m);
    if (u8() != version) fail("unsupported version");
    if (u8() != dtype_f64) fail("unsupported dtype");
  }
  void finish() {
    if (pos_ != data_.size()) fail(std::to_string(data_.size() - pos_) + " trailing bytes");
  }
  [[noreturn]] void fail(const std::string& what) const { throw IoError(path_ + ": " + what); }

 private:
  void need(std::size_t n) {
    if (data_.size() - pos_ < n) fail("unexpected end of file");
  }
  std::string data_;
  std::string path_;
  std::size_t pos_ = 0;
};

inline std::uint64_t checked_product(const std::vector<Index>& dims, const Reader& r) {
  std::uint64_t p = 1;
  for (Index n : dims) {
    if (static_cast<std::uint64_t>(n) > max_elements / p) r.fail("element count overflows");
    p *= static_cast<std::uint64_t>(n);
  }
  return p;
}

inline void write_tensor_body(Writer& w, const DenseTensor& x) {
  for (Index n : x.dims()) w.u64(static_cast<std::uint64_t>(n));
  w.f64s(x.raw(), static_cast<std::size_t>(x.size()));
}

inline DenseTensor read_tensor_body(Reader& r, Index order) {
  std::vector<Index> dims;
  for (Index k = 0; k < order; ++k) dims.push_back(r.dim());
  std::vector<double> data(checked_product(dims, r));
  r.f64s(data.data(), data.size());
  return DenseTensor(std::move(dims), std::move(data));
}

}  // namespace io_detail

/// Replaces `path` with `content` via a temporary file and rename.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::random_device rd;
  const fs::path tmp = dir / (path.filename().string() + ".tmp" + std::to_string(rd()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignore;
    fs::remove(tmp, ignore);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return data;
}

inline std::string encode_tensor(const DenseTensor& x) {
  detail::require(x.order() <= 255, "encode_tensor: order exceeds 255");
  io_detail::Writer w;
  w.bytes("KTEN");
  w.u8(io_detail::version);
  w.u8(io_detail::dtype_f64);
  w.u8(static_cast<std::uint8_t>(x.order()));
  w.u8(0);
  io_detail::write_tensor_body(w, x);
  return w.str();
}

inline DenseTensor decode_tensor(std::string data, const std::string& origin = "<memory>") {
  io_detail::Reader r(std::move(data), origin);
  r.header("KTEN");
  const Index order = r.u8();
  r.u8();
  if (order == 0) r.fail("order must be >= 1");
  DenseTensor x = io_detail::read_tensor_body(r, order);
  r.finish();
  return x;
}

inline void write_tensor(const std::filesystem::path& path, const DenseTensor& x) {
  write_file_atomic(path, encode_tensor(x));
}

inline DenseTensor read_tensor(const std::filesystem::path& path) {
  return decode_tensor(read_file(path), path.string());
}

inline void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  write_tensor(path, DenseTensor::from_matrix(m));
}

inline Matrix read_matrix(const std::filesystem::path& path) {
  const DenseTensor x = read_tensor(path);
  if (x.order() != 2) throw IoError(path.string() + ": expected an order-2 tensor");
  return x.to_matrix();
}

inline DenseTensor markov_to_tensor(const MarkovSequence& seq) {
  seq.validate();
  const Index m = seq.m(), n = seq.n(), t = static_cast<Index>(seq.blocks.size());
  DenseTensor x({m, n, t});
  for (Index k = 0; k < t; ++k)
    std::copy(seq.blocks[static_cast<std::size_t>(k)].data(), seq.blocks[static_cast<std::size_t>(k)].data() + m * n,
              x.raw() + k * m * n);
  return x;
}

/// Inverse of markov_to_tensor; s = floor(slices / 2).
inline MarkovSequence markov_from_tensor(const DenseTensor& x) {
  detail::require(x.order() == 3, "markov_from_tensor: expected an m x n x 2s tensor");
  const Index m = x.dim(0), n = x.dim(1);
  MarkovSequence seq;
  seq.s = x.dim(2) / 2;
  for (Index k = 0; k < x.dim(2); ++k) seq.blocks.push_back(Eigen::Map<const Matrix>(x.raw() + k * m * n, m, n));
  seq.validate();
  return seq;
}

inline std::string encode_tucker(const TuckerTensor& t) {
  t.validate();
  detail::require(t.order() <= 255, "encode_tucker: order exceeds 255");
  io_detail::Writer w;
  w.bytes("KTUC");
  w.u8(io_detail::version);
  w.u8(io_detail::dtype_f64);
  w.u8(static_cast<std::uint8_t>(t.order()));
  w.u8(0);
  for (Index r : t.core.dims()) w.u64(static_cast<std::uint64_t>(r));
  for (const auto& f : t.factors) w.u64(static_cast<std::uint64_t>(f.rows()));
  for (bool o : t.orthonormal) w.u8(o ? 1 : 0);
  w.f64s(t.core.raw(), static_cast<std::size_t>(t.core.size()));
  for (const auto& f : t.factors) w.f64s(f.data(), static_cast<std::size_t>(f.size()));
  return w.str();
}

inline TuckerTensor decode_tucker(std::string data, const std::string& origin = "<memory>") {
  io_detail::Reader r(std::move(data), origin);
  r.header("KTUC");
  const Index order = r.u8();
  r.u8();
  if (order == 0) r.fail("order must be >= 1");
  std::vector<Index> core_dims, rows;
  for (Index k = 0; k < order; ++k) core_dims.push_back(r.dim());
  for (Index k = 0; k < order; ++k) rows.push_back(r.dim());
  TuckerTensor t;
  for (Index k = 0; k < order; ++k) {
    const std::uint8_t flag = r.u8();
    if (flag > 1) r.fail("orthonormal flag must be 0 or 1");
    t.orthonormal.push_back(flag == 1);
  }
  std::vector<double> core(io_detail::checked_product(core_dims, r));
  r.f64s(core.data(), core.size());
  t.core = DenseTensor(core_dims, std::move(core));
  for (Index k = 0; k < order; ++k) {
    const Index nr = rows[static_cast<std::size_t>(k)], nc = core_dims[static_cast<std::size_t>(k)];
    io_detail::checked_product({nr, nc}, r);
    Matrix f(nr, nc);
    r.f64s(f.data(), static_cast<std::uint64_t>(f.size()));
    t.factors.push_back(std::move(f));
  }
  r.finish();
  try {
    t.validate();
  } catch (const DimensionError& e) {
    r.fail(e.what());
  }
  return t;
}

inline void write_tucker(const std::filesystem::path& path, const TuckerTensor& t) {
  write_file_atomic(path, encode_tucker(t));
}

inline TuckerTensor read_tucker(const std::filesystem::path& path) {
  return decode_tucker(read_file(path), path.string());
}

inline std::string encode_block(const BlockStructuredMatrix& a) {
  io_detail::Writer w;
  w.bytes("KBLK");
  w.u8(io_detail::version);
  w.u8(io_detail::dtype_f64);
  w.u8(0);
  w.u8(0);
  for (Index v : {static_cast<Index>(a.terms().size()), a.p(), a.q(), a.m(), a.n()}) w.u64(static_cast<std::uint64_t>(v));
  for (const auto& term : a.terms()) {
    w.u64(term.pattern.ones.size());
    for (const auto& [i, j] : term.pattern.ones) {
      w.u64(static_cast<std::uint64_t>(i));
      w.u64(static_cast<std::uint64_t>(j));
    }
    w.f64s(term.block.data(), static_cast<std::size_t>(term.block.size()));
  }
  return w.str();
}

inline BlockStructuredMatrix decode_block(std::string data, const std::string& origin = "<memory>") {
  io_detail::Reader r(std::move(data), origin);
  r.header("KBLK");
  r.u8();
  r.u8();
  const std::uint64_t t = r.u64();
  const Index p = r.dim(), q = r.dim(), m = r.dim(), n = r.dim();
  io_detail::checked_product({m, n}, r);
  BlockStructuredMatrix a(p, q, m, n);
  for (std::uint64_t k = 0; k < t; ++k) {
    const std::uint64_t count = r.u64();
    if (count > static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(q)) r.fail("pattern has too many ones");
    Pattern e{p, q, {}};
    for (std::uint64_t c = 0; c < count; ++c) {
      const std::uint64_t i = r.u64(), j = r.u64();
      if (i >= static_cast<std::uint64_t>(p) || j >= static_cast<std::uint64_t>(q)) r.fail("pattern entry out of range");
      e.ones.emplace_back(static_cast<Index>(i), static_cast<Index>(j));
    }
    Matrix block(m, n);
    r.f64s(block.data(), static_cast<std::uint64_t>(block.size()));
    try {
      a.add_term(std::move(e), std::move(block));
    } catch (const DimensionError& err) {
      r.fail(err.what());
    }
  }
  r.finish();
  return a;
}

inline void write_block(const std::filesystem::path& path, const BlockStructuredMatrix& a) {
  write_file_atomic(path, encode_block(a));
}

inline BlockStructuredMatrix read_block(const std::filesystem::path& path) {
  return decode_block(read_file(path), path.string());
}

}  // namespace krp
