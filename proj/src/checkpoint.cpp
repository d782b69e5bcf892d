#include "assortgen/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "assortgen/error.hpp"

namespace assortgen {

namespace fs = std::filesystem;

namespace {

void put_f64le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xffu));
    bits >>= 8;
  }
}

double get_f64le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  return std::bit_cast<double>(bits);
}

}  // namespace

nlohmann::json architecture_to_json(const Architecture& arch) {
  return {{"layers", arch.layers},
          {"hidden", arch.hidden},
          {"gap_scale", arch.gap_scale},
          {"value_scale", arch.value_scale},
          {"aggregation", "sum, learnable self weight"},
          {"conditioning", "feature-wise affine, linear in condition"},
          {"activation", "silu"},
          {"edge_representation", "[h_u + h_v, h_u * h_v]"},
          {"value_pooling", "mean"}};
}

Architecture architecture_from_json(const nlohmann::json& j) {
  Architecture a;
  a.layers = j.at("layers").get<int>();
  a.hidden = j.at("hidden").get<int>();
  a.gap_scale = j.at("gap_scale").get<double>();
  a.value_scale = j.at("value_scale").get<double>();
  return a;
}

void save_checkpoint(const std::string& dir, const Checkpoint& ckpt) {
  ckpt.params.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create checkpoint directory " + dir + ": " + ec.message());

  nlohmann::json arrays = nlohmann::json::array();
  for (const ParamSlot& s : ckpt.params.layout().slots) {
    arrays.push_back({{"name", s.name}, {"shape", {s.rows, s.cols}}, {"dtype", "f64le"}, {"offset", s.offset * 8}});
  }
  const nlohmann::json manifest = {{"format_version", kCheckpointFormatVersion},
                                   {"architecture", architecture_to_json(ckpt.params.arch())},
                                   {"train_config", ckpt.train_config},
                                   {"seed", ckpt.seed.value},
                                   {"num_values", ckpt.params.size()},
                                   {"arrays", arrays}};
  std::string blob;
  blob.reserve(ckpt.params.size() * 8);
  for (double v : ckpt.params.data()) put_f64le(blob, v);

  std::ofstream pb(fs::path(dir) / "params.bin", std::ios::binary | std::ios::trunc);
  pb.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  std::ofstream mf(fs::path(dir) / "manifest.json", std::ios::trunc);
  mf << manifest.dump(2) << '\n';
  if (!pb || !mf) throw Error(ErrorKind::Io, "failed writing checkpoint to " + dir);
}

Checkpoint load_checkpoint(const std::string& dir) {
  const fs::path mpath = fs::path(dir) / "manifest.json";
  const fs::path ppath = fs::path(dir) / "params.bin";
  if (!fs::exists(mpath) || !fs::exists(ppath)) throw Error(ErrorKind::MissingCheckpoint, "no checkpoint at " + dir);
  nlohmann::json manifest;
  try {
    std::ifstream in(mpath);
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("checkpoint manifest: ") + e.what());
  }
  const int version = manifest.value("format_version", -1);
  if (version != kCheckpointFormatVersion) {
    throw Error(ErrorKind::UnsupportedVersion, "checkpoint format version " + std::to_string(version));
  }

  Checkpoint out;
  try {
    out.params = PolicyParams(architecture_from_json(manifest.at("architecture")));
    out.train_config = manifest.at("train_config");
    out.seed = Seed{manifest.at("seed").get<std::uint64_t>()};
    const auto& arrays = manifest.at("arrays");
    const auto& slots = out.params.layout().slots;
    if (arrays.size() != slots.size()) throw Error(ErrorKind::ShapeMismatch, "array count mismatch");
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto& a = arrays[i];
      const auto shape = a.at("shape").get<std::vector<std::size_t>>();
      if (a.at("name").get<std::string>() != slots[i].name || shape.size() != 2 || shape[0] != slots[i].rows ||
          shape[1] != slots[i].cols || a.at("offset").get<std::size_t>() != slots[i].offset * 8 ||
          a.at("dtype").get<std::string>() != "f64le") {
        throw Error(ErrorKind::ShapeMismatch, "array " + slots[i].name + " does not match architecture");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("checkpoint manifest: ") + e.what());
  }

  std::ifstream pb(ppath, std::ios::binary);
  const std::string blob((std::istreambuf_iterator<char>(pb)), std::istreambuf_iterator<char>());
  if (blob.size() != out.params.size() * 8) throw Error(ErrorKind::ShapeMismatch, "params.bin size mismatch");
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  for (std::size_t i = 0; i < out.params.size(); ++i) out.params.data()[i] = get_f64le(bytes + 8 * i);
  out.params.validate();
  return out;
}

}  // namespace assortgen
