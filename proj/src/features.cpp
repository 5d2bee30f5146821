#include "tierflow/features.hpp"

#include <algorithm>
#include <optional>

#include "tierflow/error.hpp"
#include "tierflow/io.hpp"

namespace tierflow {

LatentStore::LatentStore(std::size_t width) : width_(width) {
  if (width_ == 0) throw DataError("latent width must be positive");
}

void LatentStore::insert(std::string id, std::vector<double> values) {
  if (id.empty()) throw DataError("latent id is empty");
  if (values.size() != width_) {
    throw DataError("latent vector '" + id + "' has " + std::to_string(values.size()) +
                    " values, store width is " + std::to_string(width_));
  }
  if (!entries_.emplace(id, std::move(values)).second) {
    throw DataError("duplicate latent id '" + id + "'");
  }
}

const std::vector<double>& LatentStore::at(const std::string& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw DataError("no features for id '" + id + "'");
  return it->second;
}

std::vector<std::string> LatentStore::ids() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [id, _] : entries_) out.push_back(id);
  return out;
}

LatentStore latents_from_bits(const BitVectorStore& bits) {
  LatentStore out(bits.width());
  for (const auto& [id, v] : bits.entries()) {
    out.insert(id, std::vector<double>(v.begin(), v.end()));
  }
  return out;
}

LatentStore parse_latents(std::string_view text, const std::string& source) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(source, 1, "latent file is empty");
  std::optional<LatentStore> store;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 2 || fields[0].empty()) {
      throw ParseError(source, line_no, "expected 'id<TAB>v1,v2,...'");
    }
    std::vector<double> values;
    for (auto token : split(fields[1], ',')) {
      double v = 0.0;
      if (!parse_double(token, v)) {
        throw ParseError(source, line_no, "bad number '" + std::string(token) + "'");
      }
      values.push_back(v);
    }
    if (!store) store.emplace(values.size());
    try {
      store->insert(std::string(fields[0]), std::move(values));
    } catch (const DataError& e) {
      throw ParseError(source, line_no, e.what());
    }
  }
  return std::move(*store);
}

std::string latents_to_text(const LatentStore& store) {
  std::string out;
  for (const auto& [id, values] : store.entries()) {
    out += id;
    out += '\t';
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (k) out += ',';
      out += format_exact(values[k]);
    }
    out += '\n';
  }
  return out;
}

LatentStore load_latents(const std::filesystem::path& path) {
  return parse_latents(read_text_file(path), path.string());
}

void save_latents(const LatentStore& store, const std::filesystem::path& path) {
  write_text_file(path, latents_to_text(store));
}

void write_features(std::span<double> row, const LabeledPair& pair,
                    const LatentStore& compound_latents, const LatentStore& protein_latents) {
  const auto& p = protein_latents.at(pair.protein_id);
  const auto& c = compound_latents.at(pair.compound_id);
  if (row.size() != p.size() + c.size()) {
    throw ShapeError("write_features: row width " + std::to_string(row.size()) + ", need " +
                     std::to_string(p.size() + c.size()));
  }
  std::copy(p.begin(), p.end(), row.begin());
  std::copy(c.begin(), c.end(), row.begin() + static_cast<std::ptrdiff_t>(p.size()));
}

FeatureRow make_features(const LabeledPair& pair, const LatentStore& compound_latents,
                         const LatentStore& protein_latents) {
  FeatureRow out;
  out.values.resize(protein_latents.width() + compound_latents.width());
  write_features(out.values, pair, compound_latents, protein_latents);
  out.label = static_cast<double>(pair.label);
  return out;
}

}  // namespace tierflow
