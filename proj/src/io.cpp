#include "nlwave/io.hpp"

#include "nlwave/errors.hpp"

#include <openssl/evp.h>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nlwave {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'W', 'T', 'R', 'A', 'C', 'E'};
constexpr std::uint32_t kVersion = 1;
const std::string kUnitsPrefix = "# units: ";

static_assert(std::endian::native == std::endian::little, "binary traces assume a little-endian host");

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_string(std::string& out, const std::string& s) {
  put(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Cursor {
 public:
  explicit Cursor(const std::string& b) : bytes_(b) {}
  template <class T>
  T take() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string take_string() {
    const auto n = take<std::uint32_t>();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw InvalidArgument("binary trace is truncated");
  }
  const std::string& bytes_;
  std::size_t pos_ = 8;
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

void check_shape(const Series& s) {
  if (s.columns.size() != s.data.size() || s.units.size() != s.columns.size())
    throw InvalidArgument("trace columns, units and data disagree");
  for (const auto& c : s.data)
    if (c.size() != s.rows()) throw InvalidArgument("trace columns have unequal length");
  for (const auto& c : s.columns)
    if (c.find_first_of(",\n") != std::string::npos) throw InvalidArgument("trace column name contains a separator");
}

Series decode_binary(const std::string& bytes) {
  Cursor c(bytes);
  if (c.take<std::uint32_t>() != kVersion) throw InvalidArgument("unsupported binary trace version");
  const auto ncol = c.take<std::uint32_t>();
  const auto nrow = c.take<std::uint64_t>();
  Series s;
  for (std::uint32_t j = 0; j < ncol; ++j) s.columns.push_back(c.take_string());
  for (std::uint32_t j = 0; j < ncol; ++j) s.units.push_back(c.take_string());
  s.data.assign(ncol, std::vector<double>(nrow));
  for (std::uint64_t i = 0; i < nrow; ++i)
    for (std::uint32_t j = 0; j < ncol; ++j) s.data[j][i] = c.take<double>();
  if (!c.done()) throw InvalidArgument("binary trace has trailing bytes");
  return s;
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) {
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw InvalidArgument("trace value '" + text + "' is not a number");
  }
  return v;
}

Series decode_csv(const std::string& bytes) {
  std::stringstream in(bytes);
  std::string header, units;
  if (!std::getline(in, header) || !std::getline(in, units) || units.rfind(kUnitsPrefix, 0) != 0)
    throw InvalidArgument("csv trace needs a header line and a units line");
  Series s;
  s.columns = split(header, ',');
  s.units = split(units.substr(kUnitsPrefix.size()), ',');
  if (s.units.size() != s.columns.size()) throw InvalidArgument("csv trace units do not match the header");
  s.data.assign(s.columns.size(), {});
  for (std::string line; std::getline(in, line);) {
    const auto cells = split(line, ',');
    if (cells.size() != s.columns.size()) throw InvalidArgument("csv trace row has the wrong number of cells");
    for (std::size_t j = 0; j < cells.size(); ++j) s.data[j].push_back(parse_double(cells[j]));
  }
  return s;
}

}  // namespace

TraceFormat parse_trace_format(const std::string& name) {
  if (name == "csv") return TraceFormat::csv;
  if (name == "binary") return TraceFormat::binary;
  throw InvalidArgument("unknown trace format '" + name + "'; valid formats: csv, binary");
}

std::string trace_extension(TraceFormat f) { return f == TraceFormat::csv ? ".csv" : ".bin"; }

std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string encode_trace(const Series& s, TraceFormat f) {
  check_shape(s);
  std::string out;
  if (f == TraceFormat::csv) {
    out += join(s.columns, ',') + "\n";
    out += kUnitsPrefix + join(s.units, ',') + "\n";
    for (std::size_t i = 0; i < s.rows(); ++i) {
      for (std::size_t j = 0; j < s.data.size(); ++j) {
        if (j) out += ',';
        out += format_double(s.data[j][i]);
      }
      out += '\n';
    }
    return out;
  }
  out.append(kMagic, sizeof kMagic);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(s.columns.size()));
  put(out, static_cast<std::uint64_t>(s.rows()));
  for (const auto& c : s.columns) put_string(out, c);
  for (const auto& u : s.units) put_string(out, u);
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (const auto& col : s.data) put(out, col[i]);
  return out;
}

Series decode_trace(const std::string& bytes) {
  if (bytes.size() >= sizeof kMagic && std::memcmp(bytes.data(), kMagic, sizeof kMagic) == 0)
    return decode_binary(bytes);
  return decode_csv(bytes);
}

Series read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read trace '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  Series s = decode_trace(ss.str());
  s.name = path.stem().string();
  return s;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace nlwave
