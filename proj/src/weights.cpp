#include "constyle/weights.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace constyle {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'C', 'S', 'W', 'G', 'T', '0', '0', '1'};

void write_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::ifstream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

json open_header(std::ifstream& in, const std::string& path) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0)
    throw DataError("weights: bad magic in " + path);
  const std::uint64_t header_len = read_u64(in);
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw DataError("weights: truncated header in " + path);
  try {
    return json::parse(header);
  } catch (const json::exception& e) {
    throw DataError(std::string("weights: bad header JSON: ") + e.what());
  }
}

}  // namespace

void save_weights(const std::string& path, const std::map<std::string, Tensor>& tensors,
                  const json& meta, const std::string& dtype) {
  if (dtype != "f32" && dtype != "f64") throw ValueError("save_weights: dtype must be f32 or f64");
  const std::size_t elem = dtype == "f32" ? 4 : 8;

  json index = json::object();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    index[name] = json{{"shape", t.shape}, {"dtype", dtype}, {"offset", offset}};
    offset += t.numel() * elem;
  }
  const json header{{"schema_version", 1}, {"meta", meta}, {"tensors", index}};
  const std::string header_str = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("save_weights: cannot open " + path);
  out.write(kMagic, 8);
  write_u64(out, header_str.size());
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));

  for (const auto& [name, t] : tensors) {
    if (dtype == "f32") {
      std::vector<float> buf(t.data.size());
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = static_cast<float>(t.data[i]);
      out.write(reinterpret_cast<const char*>(buf.data()),
                static_cast<std::streamsize>(buf.size() * 4));
    } else {
      out.write(reinterpret_cast<const char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * 8));
    }
  }
  if (!out) throw DataError("save_weights: write failed: " + path);
}

LoadedWeights load_weights(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("load_weights: cannot open " + path);
  const json header = open_header(in, path);

  LoadedWeights out;
  out.meta = header.value("meta", json::object());
  const std::streampos data_start = in.tellg();

  for (const auto& [name, info] : header.at("tensors").items()) {
    const std::vector<int> shape = info.at("shape").get<std::vector<int>>();
    const std::string dtype = info.at("dtype").get<std::string>();
    const std::uint64_t offset = info.at("offset").get<std::uint64_t>();
    Tensor t(shape);
    in.seekg(data_start + static_cast<std::streamoff>(offset));
    if (dtype == "f32") {
      std::vector<float> buf(t.numel());
      in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
      for (std::size_t i = 0; i < buf.size(); ++i) t.data[i] = buf[i];
    } else if (dtype == "f64") {
      in.read(reinterpret_cast<char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * 8));
    } else {
      throw DataError("load_weights: unknown dtype " + dtype);
    }
    if (!in) throw DataError("load_weights: truncated data for tensor " + name);
    out.tensors.emplace(name, std::move(t));
  }
  return out;
}

json read_weight_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("read_weight_header: cannot open " + path);
  return open_header(in, path);
}

}  // namespace constyle
