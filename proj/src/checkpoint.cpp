#include "ctalab/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "ctalab/error.hpp"

namespace ctalab {

namespace {

constexpr char kMagic[4] = {'C', 'T', 'L', 'B'};
constexpr std::uint32_t kVersion = 1;

void require_little_endian() {
  if constexpr (std::endian::native != std::endian::little) {
    throw Error(ErrorCode::FormatError, "checkpoint container requires a little-endian host");
  }
}

struct TensorEntry {
  std::string name;
  std::uint64_t rows, cols, offset;  // offset in doubles
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path,
                     bool merged) {
  require_little_endian();

  const bool bake = merged && ckpt.adapters.has_value();
  TransformerWeights baked;
  const TransformerWeights* weights = &ckpt.weights;
  if (bake) {
    baked = merge(ckpt.weights, *ckpt.adapters);
    weights = &baked;
  }
  const bool with_adapters = ckpt.adapters.has_value() && !merged;

  // Tensor directory: base tensors first, then adapter factors.
  auto views = tensor_views(const_cast<TransformerWeights&>(*weights));
  std::vector<TensorEntry> entries;
  std::uint64_t offset = 0;
  for (const auto& v : views) {
    entries.push_back({v.name, static_cast<std::uint64_t>(v.rows),
                       static_cast<std::uint64_t>(v.cols), offset});
    offset += static_cast<std::uint64_t>(v.size());
  }
  nlohmann::json adapter_meta = nlohmann::json::array();
  if (with_adapters) {
    for (const auto& adapter : ckpt.adapters->adapters) {
      nlohmann::json meta = {
          {"target", adapter.target},
          {"rows_a", adapter.a.rows()},
          {"cols_a", adapter.a.cols()},
          {"cols_b", adapter.b.cols()},
          {"offset_a", offset},
      };
      offset += static_cast<std::uint64_t>(adapter.a.size());
      meta["offset_b"] = offset;
      offset += static_cast<std::uint64_t>(adapter.b.size());
      adapter_meta.push_back(std::move(meta));
    }
  }

  nlohmann::json tensor_meta = nlohmann::json::array();
  for (const auto& e : entries) {
    tensor_meta.push_back(
        {{"name", e.name}, {"rows", e.rows}, {"cols", e.cols}, {"offset", e.offset}});
  }
  nlohmann::json header = {
      {"format", "ctalab-checkpoint"},
      {"version", kVersion},
      {"train_config", nlohmann::json::parse(train_config_to_json(ckpt.train_config))},
      {"vocabulary", ckpt.tokenizer.vocabulary()},
      {"epochs_run", ckpt.epochs_run},
      {"loss_history", ckpt.loss_history},
      {"fingerprint", ckpt.fingerprint},
      {"dataset_fingerprint", ckpt.dataset_fingerprint},
      {"corpus_fingerprint", ckpt.corpus_fingerprint},
      {"saved_as", with_adapters ? "adapted" : "merged"},
      {"tensors", tensor_meta},
      {"adapters", adapter_meta},
  };
  const std::string header_text = header.dump();

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write checkpoint '" + path.string() + "'");
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t header_size = header_text.size();
    out.write(reinterpret_cast<const char*>(&header_size), sizeof(header_size));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& v : views) {
      out.write(reinterpret_cast<const char*>(v.data),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    if (with_adapters) {
      for (const auto& adapter : ckpt.adapters->adapters) {
        out.write(reinterpret_cast<const char*>(adapter.a.data()),
                  static_cast<std::streamsize>(adapter.a.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(adapter.b.data()),
                  static_cast<std::streamsize>(adapter.b.size() * sizeof(double)));
      }
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  require_little_endian();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, "cannot open checkpoint '" + path.string() + "'");

  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t header_size = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&header_size), sizeof(header_size));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::FormatError, path.string() + ": not a ctalab checkpoint");
  }
  if (version != kVersion) {
    throw Error(ErrorCode::FormatError,
                path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  std::string header_text(header_size, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_size));
  if (!in) throw Error(ErrorCode::FormatError, path.string() + ": truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::FormatError, path.string() + ": bad header: " + e.what());
  }

  Checkpoint ckpt;
  ckpt.train_config = train_config_from_json(header.at("train_config").dump());
  ckpt.tokenizer =
      Tokenizer::from_vocabulary(header.at("vocabulary").get<std::vector<std::string>>());
  if (ckpt.train_config.model.vocab_size != ckpt.tokenizer.vocab_size()) {
    throw Error(ErrorCode::FormatError, path.string() + ": vocabulary size mismatch");
  }
  ckpt.epochs_run = header.value("epochs_run", 0);
  ckpt.loss_history = header.value("loss_history", std::vector<double>{});
  ckpt.fingerprint = header.value("fingerprint", "");
  ckpt.dataset_fingerprint = header.value("dataset_fingerprint", "");
  ckpt.corpus_fingerprint = header.value("corpus_fingerprint", "");

  ckpt.weights = init_weights(ckpt.train_config.model, 0);
  auto views = tensor_views(ckpt.weights);
  const auto& tensors = header.at("tensors");
  if (tensors.size() != views.size()) {
    throw Error(ErrorCode::FormatError, path.string() + ": tensor directory size mismatch");
  }
  const std::streampos payload_start = in.tellg();
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& meta = tensors[i];
    if (meta.at("name").get<std::string>() != views[i].name ||
        meta.at("rows").get<std::int64_t>() != views[i].rows ||
        meta.at("cols").get<std::int64_t>() != views[i].cols) {
      throw Error(ErrorCode::FormatError,
                  path.string() + ": tensor '" + views[i].name + "' has mismatched shape");
    }
    in.seekg(payload_start + static_cast<std::streamoff>(
                                 meta.at("offset").get<std::uint64_t>() * sizeof(double)));
    in.read(reinterpret_cast<char*>(views[i].data),
            static_cast<std::streamsize>(views[i].size() * sizeof(double)));
    if (!in) {
      throw Error(ErrorCode::FormatError,
                  path.string() + ": truncated tensor '" + views[i].name + "'");
    }
  }

  const auto& adapter_meta = header.at("adapters");
  if (!adapter_meta.empty()) {
    AdapterSet set;
    set.config = ckpt.train_config.lora;
    for (const auto& meta : adapter_meta) {
      LoraAdapter adapter;
      adapter.target = meta.at("target").get<std::string>();
      const auto rows_a = meta.at("rows_a").get<Eigen::Index>();
      const auto cols_a = meta.at("cols_a").get<Eigen::Index>();
      const auto cols_b = meta.at("cols_b").get<Eigen::Index>();
      const auto& base = target_matrix(ckpt.weights, adapter.target);
      if (rows_a != base.rows() || cols_b != base.cols() || cols_a != set.config.rank) {
        throw Error(ErrorCode::FormatError,
                    path.string() + ": adapter '" + adapter.target + "' has mismatched shape");
      }
      adapter.a.resize(rows_a, cols_a);
      adapter.b.resize(cols_a, cols_b);
      in.seekg(payload_start + static_cast<std::streamoff>(
                                   meta.at("offset_a").get<std::uint64_t>() * sizeof(double)));
      in.read(reinterpret_cast<char*>(adapter.a.data()),
              static_cast<std::streamsize>(adapter.a.size() * sizeof(double)));
      in.seekg(payload_start + static_cast<std::streamoff>(
                                   meta.at("offset_b").get<std::uint64_t>() * sizeof(double)));
      in.read(reinterpret_cast<char*>(adapter.b.data()),
              static_cast<std::streamsize>(adapter.b.size() * sizeof(double)));
      if (!in) {
        throw Error(ErrorCode::FormatError,
                    path.string() + ": truncated adapter '" + adapter.target + "'");
      }
      set.adapters.push_back(std::move(adapter));
    }
    ckpt.adapters = std::move(set);
  }
  return ckpt;
}

}  // namespace ctalab
