#include "absa/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include "absa/error.hpp"

namespace absa {
namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > bytes_.size()) {
      throw ParseError(std::string("checkpoint: truncated while reading ") + what +
                       " at byte " + std::to_string(pos_));
    }
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

  std::string raw(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_archive(const std::vector<NamedTensor>& entries) {
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  out.push_back(static_cast<char>(kCheckpointVersion));
  put_u32(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, t] : entries) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    for (double v : t.values()) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

std::vector<NamedTensor> decode_archive(const std::string& bytes) {
  Reader r(bytes);
  if (r.raw(sizeof(kCheckpointMagic), "magic") !=
      std::string(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw ParseError("checkpoint: bad magic");
  }
  const auto version = r.u8("version");
  if (version != kCheckpointVersion) {
    throw ParseError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32("entry count");
  std::vector<NamedTensor> out;
  out.reserve(count);
  for (std::uint32_t e = 0; e < count; ++e) {
    const std::uint32_t name_len = r.u32("name length");
    std::string name = r.raw(name_len, "name");
    const std::uint32_t rank = r.u32("rank");
    if (rank == 0 || rank > 3) {
      throw ParseError("checkpoint: entry '" + name + "' has invalid rank " +
                       std::to_string(rank));
    }
    Shape shape(rank);
    for (auto& d : shape) d = r.u32("extent");
    const std::size_t n = shape_size(shape);
    r.need(4 * n, "values");
    std::vector<double> values(n);
    for (auto& v : values) v = std::bit_cast<float>(r.u32("value"));
    out.push_back({std::move(name), Tensor(std::move(shape), std::move(values))});
  }
  if (!r.done()) throw ParseError("checkpoint: trailing bytes after last entry");
  return out;
}

void write_archive(const std::filesystem::path& path, const std::vector<NamedTensor>& entries) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  const std::string bytes = encode_archive(entries);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<NamedTensor> read_archive(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_archive(bytes);
}

void save_params(const std::filesystem::path& path, const ParamStore& store) {
  std::vector<NamedTensor> entries;
  for (const auto& [name, e] : store.entries()) entries.push_back({name, e.value});
  write_archive(path, entries);
}

void load_params(const std::vector<NamedTensor>& entries, ParamStore& store) {
  std::map<std::string, const Tensor*> by_name;
  for (const auto& e : entries) by_name[e.name] = &e.value;
  for (auto& [name, e] : store.entries()) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw NotFound("checkpoint: missing parameter '" + name + "'");
    if (it->second->shape() != e.value.shape()) {
      throw ShapeError("checkpoint: parameter '" + name + "' has shape " +
                       shape_string(it->second->shape()) + ", model expects " +
                       shape_string(e.value.shape()));
    }
    e.value = *it->second;
  }
}

void load_params(const std::filesystem::path& path, ParamStore& store) {
  load_params(read_archive(path), store);
}

}  // namespace absa
