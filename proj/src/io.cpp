#include "rcpd/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rcpd/error.hpp"

namespace rcpd::io {

namespace {

constexpr char kMagic[4] = {'R', 'C', 'P', 'D'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t q = 0; q < sizeof(T) / 2; ++q) std::swap(b[q], b[sizeof(T) - 1 - q]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::ostream& os, T v) {
  v = to_little(v);
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) fail(ErrorCode::Io, "unexpected end of binary container");
  return to_little(v);
}

void write_header(std::ostream& os, std::span<const std::uint64_t> dims) {
  os.write(kMagic, 4);
  put<std::uint32_t>(os, kFormatVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(dims.size()));
  put<std::uint32_t>(os, 0);
  for (auto d : dims) put<std::uint64_t>(os, d);
}

std::vector<std::uint64_t> read_header(std::istream& is, std::uint32_t expect_ndims) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) fail(ErrorCode::Parse, "bad magic bytes");
  const auto version = get<std::uint32_t>(is);
  if (version != kFormatVersion)
    fail(ErrorCode::Parse, "unsupported container version " + std::to_string(version));
  const auto ndims = get<std::uint32_t>(is);
  if (ndims != expect_ndims)
    fail(ErrorCode::Parse, "expected a " + std::to_string(expect_ndims) +
                               "-dimensional container, found " + std::to_string(ndims));
  (void)get<std::uint32_t>(is);
  std::vector<std::uint64_t> dims(ndims);
  for (auto& d : dims) d = get<std::uint64_t>(is);
  return dims;
}

void write_payload(std::ostream& os, std::span<const double> values) {
  for (double v : values) put<double>(os, v);
  if (!os) fail(ErrorCode::Io, "write failed");
}

std::vector<double> read_payload(std::istream& is, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = get<double>(is);
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::size_t parse_index(std::string_view s, std::size_t line_no) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad index '" + std::string(s) + "'");
  return v;
}

double parse_value(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
    fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad value '" + std::string(s) + "'");
  return v;
}

struct CsvEntries {
  std::vector<std::size_t> declared;  // from "# dims:", empty if absent
  std::vector<std::vector<std::size_t>> index;
  std::vector<double> value;
};

CsvEntries read_csv(std::istream& is, std::string_view header, std::size_t nidx) {
  CsvEntries out;
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    auto s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      constexpr std::string_view tag = "# dims:";
      if (s.substr(0, tag.size()) == tag) {
        std::istringstream ds{std::string(s.substr(tag.size()))};
        std::size_t d;
        while (ds >> d) out.declared.push_back(d);
        if (out.declared.size() != nidx) fail(ErrorCode::Parse, "malformed '# dims:' line");
      }
      continue;
    }
    if (!seen_header) {
      if (s != header) fail(ErrorCode::Parse, "expected CSV header '" + std::string(header) + "'");
      seen_header = true;
      continue;
    }
    auto fields = split(s);
    if (fields.size() != nidx + 1)
      fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": wrong field count");
    std::vector<std::size_t> ix(nidx);
    for (std::size_t q = 0; q < nidx; ++q) ix[q] = parse_index(fields[q], line_no);
    out.index.push_back(std::move(ix));
    out.value.push_back(parse_value(fields[nidx], line_no));
  }
  if (!seen_header) fail(ErrorCode::Parse, "missing CSV header");
  return out;
}

std::vector<std::size_t> resolve_dims(const CsvEntries& e, std::size_t nidx) {
  std::vector<std::size_t> dims(nidx, 0);
  for (const auto& ix : e.index)
    for (std::size_t q = 0; q < nidx; ++q) dims[q] = std::max(dims[q], ix[q] + 1);
  if (!e.declared.empty()) {
    for (std::size_t q = 0; q < nidx; ++q) {
      if (dims[q] > e.declared[q]) fail(ErrorCode::Parse, "CSV index exceeds declared dimension");
      dims[q] = e.declared[q];
    }
  }
  return dims;
}

bool is_csv(const std::filesystem::path& p) { return p.extension() == ".csv"; }

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) fail(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return is;
}

}  // namespace

void write_tensor_binary(std::ostream& os, const Tensor3& t) {
  const auto& d = t.dims();
  const std::uint64_t dims[3] = {d.I, d.J, d.K};
  write_header(os, dims);
  write_payload(os, t.data());
}

Tensor3 read_tensor_binary(std::istream& is) {
  const auto d = read_header(is, 3);
  Dims dims{d[0], d[1], d[2]};
  return Tensor3(dims, read_payload(is, dims.numel()));
}

void write_matrix_binary(std::ostream& os, const Matrix& m) {
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()),
                                 static_cast<std::uint64_t>(m.cols())};
  write_header(os, dims);
  write_payload(os, std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

Matrix read_matrix_binary(std::istream& is) {
  const auto d = read_header(is, 2);
  auto values = read_payload(is, d[0] * d[1]);
  for (double v : values)
    require(std::isfinite(v), ErrorCode::NonFinite, "matrix entries must be finite");
  return Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(d[0]),
                                  static_cast<Eigen::Index>(d[1]));
}

void write_tensor_csv(std::ostream& os, const Tensor3& t) {
  const auto [I, J, K] = t.dims();
  os << "# dims: " << I << ' ' << J << ' ' << K << '\n' << "i,j,k,value\n";
  os << std::setprecision(17);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < J; ++j)
      for (std::size_t i = 0; i < I; ++i) os << i << ',' << j << ',' << k << ',' << t(i, j, k) << '\n';
  if (!os) fail(ErrorCode::Io, "write failed");
}

Tensor3 read_tensor_csv(std::istream& is) {
  auto e = read_csv(is, "i,j,k,value", 3);
  const auto d = resolve_dims(e, 3);
  Tensor3 t(Dims{d[0], d[1], d[2]});
  for (std::size_t n = 0; n < e.value.size(); ++n)
    t(e.index[n][0], e.index[n][1], e.index[n][2]) = e.value[n];
  return t;
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  os << "# dims: " << m.rows() << ' ' << m.cols() << '\n' << "i,j,value\n";
  os << std::setprecision(17);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) os << r << ',' << c << ',' << m(r, c) << '\n';
  if (!os) fail(ErrorCode::Io, "write failed");
}

Matrix read_matrix_csv(std::istream& is) {
  auto e = read_csv(is, "i,j,value", 2);
  const auto d = resolve_dims(e, 2);
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d[0]), static_cast<Eigen::Index>(d[1]));
  for (std::size_t n = 0; n < e.value.size(); ++n)
    m(static_cast<Eigen::Index>(e.index[n][0]), static_cast<Eigen::Index>(e.index[n][1])) = e.value[n];
  return m;
}

void save_tensor(const std::filesystem::path& path, const Tensor3& t) {
  auto os = open_out(path, !is_csv(path));
  is_csv(path) ? write_tensor_csv(os, t) : write_tensor_binary(os, t);
}

Tensor3 load_tensor(const std::filesystem::path& path) {
  auto is = open_in(path, !is_csv(path));
  return is_csv(path) ? read_tensor_csv(is) : read_tensor_binary(is);
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  auto os = open_out(path, !is_csv(path));
  is_csv(path) ? write_matrix_csv(os, m) : write_matrix_binary(os, m);
}

Matrix load_matrix(const std::filesystem::path& path) {
  auto is = open_in(path, !is_csv(path));
  return is_csv(path) ? read_matrix_csv(is) : read_matrix_binary(is);
}

}  // namespace rcpd::io
