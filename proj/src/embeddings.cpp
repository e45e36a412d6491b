#include "tnet/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tnet/error.hpp"

namespace tnet::data {

namespace {

std::vector<std::string> split_spaces(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string field;
  while (is >> field) out.push_back(field);
  return out;
}

bool is_integer(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

void sample_row(Tensor& matrix, std::size_t row, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(-kOovRange, kOovRange);
  for (double& v : matrix.row(row)) v = uniform(rng);
}

}  // namespace

Vocabulary::Vocabulary() {
  add(std::string(kPad));
  add(std::string(kUnk));
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  if (tokens.size() < 2 || tokens[kPadId] != kPad || tokens[kUnkId] != kUnk) {
    throw ContractError("vocabulary must start with <pad>, <unk>");
  }
  for (auto& t : tokens) {
    if (!index_.emplace(t, tokens_.size()).second) throw ContractError("duplicate vocabulary token '" + t + "'");
    tokens_.push_back(std::move(t));
  }
}

Vocabulary Vocabulary::build(std::span<const std::vector<TargetedSentence>> datasets) {
  Vocabulary vocab;
  for (const auto& records : datasets) {
    for (const auto& rec : records) {
      for (const auto& tok : rec.tokens) vocab.add(tok);
    }
  }
  return vocab;
}

std::size_t Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, tokens_.size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::optional<std::size_t> Vocabulary::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::id(const std::string& token) const { return find(token).value_or(kUnkId); }

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ULL;
  };
  for (const auto& t : tokens_) {
    for (unsigned char c : t) mix(c);
    mix('\n');
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

EmbeddingStore random_embeddings(Vocabulary vocab, std::size_t dim_w, std::mt19937_64& rng) {
  EmbeddingStore store{std::move(vocab), Tensor(), 0, 0};
  store.matrix = Tensor({store.vocab.size(), dim_w});
  for (std::size_t r = 0; r < store.vocab.size(); ++r) {
    if (r == Vocabulary::kPadId) continue;
    sample_row(store.matrix, r, rng);
    ++store.sampled;
  }
  return store;
}

EmbeddingStore load_embeddings(const std::filesystem::path& vector_file, Vocabulary vocab,
                               std::size_t dim_w, std::mt19937_64& rng) {
  std::ifstream in(vector_file);
  if (!in) throw Error("cannot open embedding file " + vector_file.string());

  EmbeddingStore store{std::move(vocab), Tensor(), 0, 0};
  store.matrix = Tensor({store.vocab.size(), dim_w});
  std::vector<bool> seen(store.vocab.size(), false);

  std::string line;
  std::size_t line_no = 0;
  std::size_t file_dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2 && is_integer(fields[0]) && is_integer(fields[1])) continue;
    if (file_dim == 0) {
      file_dim = fields.size() - 1;
      if (file_dim != dim_w) {
        throw ParseError(vector_file.string(), line_no,
                         "embedding dimension " + std::to_string(file_dim) + " does not match dim_w " +
                             std::to_string(dim_w));
      }
    }
    if (fields.size() < dim_w + 1) {
      throw ParseError(vector_file.string(), line_no,
                       "expected " + std::to_string(dim_w) + " values, got " + std::to_string(fields.size() - 1));
    }
    // Tokens containing spaces occupy the leading fields.
    const auto token_fields = fields.size() - dim_w;
    std::string token = fields[0];
    for (std::size_t i = 1; i < token_fields; ++i) token += " " + fields[i];
    auto id = store.vocab.find(token);
    if (!id || *id == Vocabulary::kPadId || seen[*id]) continue;
    auto row = store.matrix.row(*id);
    for (std::size_t c = 0; c < dim_w; ++c) {
      const auto& f = fields[token_fields + c];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[c]);
      if (ec != std::errc() || ptr != f.data() + f.size()) {
        throw ParseError(vector_file.string(), line_no, "bad number '" + f + "'");
      }
    }
    seen[*id] = true;
    ++store.pretrained;
  }

  for (std::size_t r = 0; r < store.vocab.size(); ++r) {
    if (r == Vocabulary::kPadId || seen[r]) continue;
    sample_row(store.matrix, r, rng);
    ++store.sampled;
  }
  return store;
}

}  // namespace tnet::data
