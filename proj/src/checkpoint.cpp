#include "reenact/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "reenact/errors.hpp"

REENACT_NS_BEGIN

namespace {

constexpr char kMagic[4] = {'R', 'N', 'C', 'K'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& origin) : bytes_(bytes), origin_(origin) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw DataError(origin_ + ": truncated checkpoint while reading " + what + " at byte " +
                      std::to_string(pos_));
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

  std::string text(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

}  // namespace

const NamedTensor* CheckpointFile::find(const std::string& name) const {
  for (const NamedTensor& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

const NamedTensor& CheckpointFile::get(const std::string& name) const {
  if (const NamedTensor* e = find(name)) return *e;
  throw DataError("checkpoint has no entry '" + name + "'");
}

std::string serialize_checkpoint(const CheckpointFile& file) {
  std::string out(kMagic, 4);
  put_u32(out, file.version);
  put_u32(out, static_cast<std::uint32_t>(file.config_text.size()));
  out += file.config_text;
  put_u32(out, static_cast<std::uint32_t>(file.entries.size()));
  for (const NamedTensor& e : file.entries) {
    if (e.values.size() != e.shape.numel()) {
      throw std::invalid_argument("checkpoint entry '" + e.name +
                                  "': " + std::to_string(e.values.size()) + " values for shape " +
                                  e.shape.str());
    }
    put_u32(out, static_cast<std::uint32_t>(e.name.size()));
    out += e.name;
    for (int d : {e.shape.n, e.shape.c, e.shape.h, e.shape.w}) {
      put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (float v : e.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

CheckpointFile deserialize_checkpoint(const std::string& bytes, const std::string& origin) {
  Reader r(bytes, origin);
  if (r.text(4, "magic") != std::string(kMagic, 4)) {
    throw DataError(origin + ": not a checkpoint file (bad magic)");
  }
  CheckpointFile file;
  file.version = r.u32("version");
  if (file.version != CheckpointFile::kVersion) {
    throw DataError(origin + ": unsupported checkpoint version " + std::to_string(file.version));
  }
  file.config_text = r.text(r.u32("config length"), "config text");
  const std::uint32_t count = r.u32("entry count");
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor e;
    e.name = r.text(r.u32("name length"), "entry name");
    std::uint32_t dims[4];
    for (auto& d : dims) d = r.u32("shape");
    for (auto d : dims) {
      if (d > (1u << 30)) throw DataError(origin + ": implausible extent in '" + e.name + "'");
    }
    e.shape = Shape{static_cast<int>(dims[0]), static_cast<int>(dims[1]), static_cast<int>(dims[2]),
                    static_cast<int>(dims[3])};
    const std::size_t n = e.shape.numel();
    if (n > r.remaining() / 4) {
      throw DataError(origin + ": truncated payload for '" + e.name + "'");
    }
    e.values.resize(n);
    for (float& v : e.values) v = std::bit_cast<float>(r.u32("payload"));
    file.entries.push_back(std::move(e));
  }
  if (!r.done()) throw DataError(origin + ": trailing bytes after last entry");
  return file;
}

void write_checkpoint(const std::filesystem::path& path, const CheckpointFile& file) {
  const std::string bytes = serialize_checkpoint(file);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

CheckpointFile read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str(), path.string());
}

std::vector<float> pack_u64(std::uint64_t value) {
  std::vector<float> words(4);
  for (int i = 0; i < 4; ++i) words[i] = static_cast<float>((value >> (16 * i)) & 0xffffu);
  return words;
}

std::uint64_t unpack_u64(const std::vector<float>& words, std::size_t offset) {
  if (words.size() < offset + 4) throw DataError("packed integer truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 4; ++i) {
    const float w = words[offset + i];
    if (!(w >= 0.0f && w <= 65535.0f) || w != static_cast<float>(static_cast<std::uint32_t>(w))) {
      throw DataError("packed integer word out of range");
    }
    v |= static_cast<std::uint64_t>(w) << (16 * i);
  }
  return v;
}

REENACT_NS_END
