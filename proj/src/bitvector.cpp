#include "tierflow/bitvector.hpp"

#include "tierflow/error.hpp"
#include "tierflow/io.hpp"

namespace tierflow {

BitVectorStore::BitVectorStore(std::size_t width) : width_(width) {
  if (width_ == 0) throw DataError("bit-vector width must be positive");
}

void BitVectorStore::insert(std::string id, BitVector bits) {
  if (id.empty()) throw DataError("bit-vector id is empty");
  if (bits.size() != width_) {
    throw DataError("bit vector '" + id + "' has " + std::to_string(bits.size()) +
                    " bits, store width is " + std::to_string(width_));
  }
  for (auto b : bits) {
    if (b > 1) throw DataError("bit vector '" + id + "' holds a non-binary entry");
  }
  if (!entries_.emplace(id, std::move(bits)).second) {
    throw DataError("duplicate bit-vector id '" + id + "'");
  }
}

const BitVector& BitVectorStore::at(const std::string& id) const {
  auto it = entries_.find(id);
  if (it == entries_.end()) throw DataError("unknown bit-vector id '" + id + "'");
  return it->second;
}

std::vector<std::string> BitVectorStore::ids() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [id, _] : entries_) out.push_back(id);
  return out;
}

BitVectorStore parse_bitvectors(std::string_view text, const std::string& source) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(source, 1, "missing '#width=' header");

  constexpr std::string_view kHeader = "#width=";
  const auto header = lines[0];
  long long width = 0;
  if (header.substr(0, kHeader.size()) != kHeader ||
      !parse_int(header.substr(kHeader.size()), width) || width <= 0) {
    throw ParseError(source, 1, "expected '#width=<positive int>' header");
  }

  BitVectorStore store(static_cast<std::size_t>(width));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 2) throw ParseError(source, line_no, "expected 'id<TAB>bits'");
    const auto id = fields[0];
    const auto bits_text = fields[1];
    if (id.empty()) throw ParseError(source, line_no, "empty id");
    if (bits_text.size() != store.width()) {
      throw ParseError(source, line_no,
                       "width " + std::to_string(bits_text.size()) + " does not match header width " +
                           std::to_string(store.width()));
    }
    BitVector bits(bits_text.size());
    for (std::size_t k = 0; k < bits_text.size(); ++k) {
      const char c = bits_text[k];
      if (c != '0' && c != '1') {
        throw ParseError(source, line_no, std::string("non-binary character '") + c + "'");
      }
      bits[k] = static_cast<std::uint8_t>(c - '0');
    }
    std::string key(id);
    if (store.contains(key)) throw ParseError(source, line_no, "duplicate id '" + key + "'");
    store.insert(std::move(key), std::move(bits));
  }
  return store;
}

std::string bitvectors_to_text(const BitVectorStore& store) {
  std::string out = "#width=" + std::to_string(store.width()) + "\n";
  out.reserve(out.size() + store.size() * (store.width() + 16));
  for (const auto& [id, bits] : store.entries()) {
    out += id;
    out += '\t';
    for (auto b : bits) out += static_cast<char>('0' + b);
    out += '\n';
  }
  return out;
}

BitVectorStore load_bitvectors(const std::filesystem::path& path) {
  return parse_bitvectors(read_text_file(path), path.string());
}

void save_bitvectors(const BitVectorStore& store, const std::filesystem::path& path) {
  write_text_file(path, bitvectors_to_text(store));
}

}  // namespace tierflow
