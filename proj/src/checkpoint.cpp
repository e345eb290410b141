#include "gfscma/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "gfscma/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace gfscma {

namespace {

constexpr char kMagic[8] = {'G', 'F', 'S', 'C', 'M', 'A', 'C', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::string& out, uint64_t v) { out.append(reinterpret_cast<const char*>(&v), 8); }
void put_i64(std::string& out, int64_t v) { out.append(reinterpret_cast<const char*>(&v), 8); }

void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.append(s);
}

void put_doubles(std::string& out, const std::vector<double>& d) {
  out.append(reinterpret_cast<const char*>(d.data()), d.size() * sizeof(double));
}

void put_tensor_header(std::string& out, const Tensor& t) {
  put_u32(out, static_cast<uint32_t>(t.shape.size()));
  for (int64_t d : t.shape) put_i64(out, d);
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& path) : bytes_(bytes), path_(path) {}

  uint32_t u32() { return read_pod<uint32_t>(); }
  uint64_t u64() { return read_pod<uint64_t>(); }
  int64_t i64() { return read_pod<int64_t>(); }

  std::string str() {
    const uint32_t n = u32();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::vector<int64_t> shape() {
    const uint32_t nd = u32();
    if (nd > 8) fail("implausible tensor rank");
    std::vector<int64_t> s(nd);
    for (uint32_t i = 0; i < nd; ++i) s[i] = i64();
    return s;
  }

  std::vector<double> doubles(size_t count) {
    need(count * sizeof(double));
    std::vector<double> d(count);
    std::memcpy(d.data(), bytes_.data() + pos_, count * sizeof(double));
    pos_ += count * sizeof(double);
    return d;
  }

  void expect_magic() {
    need(sizeof(kMagic));
    if (std::memcmp(bytes_.data(), kMagic, sizeof(kMagic)) != 0) {
      fail("not a checkpoint file (bad magic)");
    }
    pos_ = sizeof(kMagic);
  }

  void done() {
    if (pos_ != bytes_.size()) fail("trailing bytes after checkpoint payload");
  }

  [[noreturn]] void fail(const std::string& why) {
    throw Error("checkpoint_mismatch", path_ + ": " + why);
  }

 private:
  template <typename T>
  T read_pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  void need(size_t n) {
    if (pos_ + n > bytes_.size()) fail("truncated checkpoint");
  }

  const std::string& bytes_;
  std::string path_;
  size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const std::string& path, const CheckpointData& data) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u64(out, data.config_digest);
  put_u32(out, static_cast<uint32_t>(data.meta.size()));
  for (const auto& [k, v] : data.meta) {
    put_str(out, k);
    put_str(out, v);
  }
  put_u32(out, static_cast<uint32_t>(data.stores.size()));
  for (const auto& [store_name, store] : data.stores) {
    put_str(out, store_name);
    put_u32(out, static_cast<uint32_t>(store.params().size()));
    for (const auto& [name, p] : store.params()) {
      put_str(out, name);
      put_tensor_header(out, p.value);
      put_doubles(out, p.value.data);
      put_doubles(out, p.m.data);
      put_doubles(out, p.v.data);
      put_i64(out, p.step);
    }
    put_u32(out, static_cast<uint32_t>(store.buffers().size()));
    for (const auto& [name, b] : store.buffers()) {
      put_str(out, name);
      put_tensor_header(out, b);
      put_doubles(out, b.data);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("io", "cannot open checkpoint for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("io", "short write to checkpoint: " + path);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot open checkpoint: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string bytes = buf.str();

  Reader r(bytes, path);
  r.expect_magic();
  const uint32_t version = r.u32();
  if (version != kVersion) {
    r.fail("unsupported format version " + std::to_string(version));
  }
  CheckpointData data;
  data.config_digest = r.u64();
  const uint32_t n_meta = r.u32();
  for (uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str();
    data.meta[k] = r.str();
  }
  const uint32_t n_stores = r.u32();
  for (uint32_t s = 0; s < n_stores; ++s) {
    const std::string store_name = r.str();
    ParamStore store;
    const uint32_t n_params = r.u32();
    for (uint32_t i = 0; i < n_params; ++i) {
      const std::string name = r.str();
      const auto shape = r.shape();
      const size_t count = static_cast<size_t>(shape_product(shape));
      store.create(name, shape);
      Param& p = store.param(name);
      p.value.data = r.doubles(count);
      p.m.data = r.doubles(count);
      p.v.data = r.doubles(count);
      p.step = r.i64();
    }
    const uint32_t n_buffers = r.u32();
    for (uint32_t i = 0; i < n_buffers; ++i) {
      const std::string name = r.str();
      const auto shape = r.shape();
      const size_t count = static_cast<size_t>(shape_product(shape));
      store.create_buffer(name, shape, 0.0);
      store.buffer(name).data = r.doubles(count);
    }
    data.stores.emplace(store_name, std::move(store));
  }
  r.done();
  return data;
}

void copy_store_checked(ParamStore& dst, const ParamStore& src, const std::string& what) {
  if (dst.params().size() != src.params().size() ||
      dst.buffers().size() != src.buffers().size()) {
    throw Error("checkpoint_mismatch", what + ": parameter set does not match the model");
  }
  for (auto& [name, p] : dst.params()) {
    auto it = src.params().find(name);
    if (it == src.params().end() || it->second.value.shape != p.value.shape) {
      throw Error("checkpoint_mismatch", what + ": parameter " + name + " missing or misshaped");
    }
    p = it->second;
  }
  for (auto& [name, b] : dst.buffers()) {
    auto it = src.buffers().find(name);
    if (it == src.buffers().end() || it->second.shape != b.shape) {
      throw Error("checkpoint_mismatch", what + ": buffer " + name + " missing or misshaped");
    }
    b = it->second;
  }
}

uint64_t fnv1a64(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xCBF29CE484222325ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

uint64_t file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("io", "cannot open file for digest: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  const std::string bytes = buf.str();
  return fnv1a64(bytes.data(), bytes.size());
}

std::string hex64(uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace gfscma
