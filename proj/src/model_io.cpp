#include "mpe/model_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mpe/errors.hpp"

namespace mpe {

namespace {

constexpr char kMagic[8] = {'M', 'P', 'E', 'M', 'O', 'D', 'E', 'L'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v),
                        static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError("truncated model file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
  uint64_t bits = std::bit_cast<uint64_t>(v);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw DataError("truncated model file");
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

void put_tokens(std::ostream& out, const TokenIndexer& indexer) {
  for (const auto& token : indexer.tokens()) {
    put_u32(out, static_cast<uint32_t>(token.size()));
    out.write(token.data(), static_cast<std::streamsize>(token.size()));
  }
}

void get_tokens(std::istream& in, uint32_t count, TokenIndexer& indexer) {
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t len = get_u32(in);
    if (len > (1u << 20)) throw DataError("model file: token too long");
    std::string token(len, '\0');
    if (!in.read(token.data(), len)) throw DataError("truncated model file");
    if (indexer.add(token) != static_cast<Index>(i))
      throw DataError("model file: duplicate token in vocabulary");
  }
}

void put_matrix(std::ostream& out, const Matrix& m) {
  for (double v : m.data()) put_f64(out, v);
}

Matrix get_matrix(std::istream& in, uint32_t rows, uint32_t cols) {
  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (double& v : m.data()) v = get_f64(in);
  return m;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}

}  // namespace

void write_model_file(const std::string& path, const EmbeddingStore& store,
                      const ComponentMask& mask, const Vocabulary& vocab) {
  if (store.objects.rows() != vocab.objects.size() ||
      store.slots.rows() != vocab.slots.size() ||
      store.currents.rows() != vocab.currents.size() ||
      store.nexts.rows() != vocab.nexts.size())
    throw DataError("store shape does not match vocabulary");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kVersion);
  put_u32(out, static_cast<uint32_t>(store.dim()));
  put_u32(out, static_cast<uint32_t>(vocab.objects.size()));
  put_u32(out, static_cast<uint32_t>(vocab.slots.size()));
  put_u32(out, static_cast<uint32_t>(vocab.currents.size()));
  put_u32(out, static_cast<uint32_t>(vocab.nexts.size()));
  out.put(mask.use_object ? 1 : 0);
  out.put(mask.use_time ? 1 : 0);
  put_tokens(out, vocab.objects);
  put_tokens(out, vocab.slots);
  put_tokens(out, vocab.currents);
  put_tokens(out, vocab.nexts);
  put_matrix(out, store.objects);
  put_matrix(out, store.slots);
  put_matrix(out, store.currents);
  put_matrix(out, store.nexts);
  if (!out) throw DataError("failed writing '" + path + "'");
}

SavedModel read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("'" + path + "' is not a model file");
  uint32_t version = get_u32(in);
  if (version != kVersion)
    throw DataError("unsupported model file version " + std::to_string(version));
  uint32_t dim = get_u32(in);
  uint32_t n_obj = get_u32(in);
  uint32_t n_slot = get_u32(in);
  uint32_t n_cur = get_u32(in);
  uint32_t n_next = get_u32(in);
  if (dim == 0 || dim > (1u << 16)) throw DataError("model file: bad dimension");
  int mask_obj = in.get();
  int mask_time = in.get();
  if (mask_obj < 0 || mask_time < 0) throw DataError("truncated model file");

  SavedModel model;
  model.mask.use_object = mask_obj != 0;
  model.mask.use_time = mask_time != 0;
  get_tokens(in, n_obj, model.vocab.objects);
  get_tokens(in, n_slot, model.vocab.slots);
  get_tokens(in, n_cur, model.vocab.currents);
  get_tokens(in, n_next, model.vocab.nexts);
  model.store.objects = get_matrix(in, n_obj, dim);
  model.store.slots = get_matrix(in, n_slot, dim);
  model.store.currents = get_matrix(in, n_cur, dim);
  model.store.nexts = get_matrix(in, n_next, dim);
  return model;
}

TransitionCounts count_transitions(const std::vector<TokenQuadruple>& quadruples) {
  TransitionCounts counts;
  for (const auto& q : quadruples) ++counts[{q.current, q.next}];
  return counts;
}

void write_transitions_tsv(std::ostream& out, const TransitionCounts& counts) {
  out << "mpe-transitions\t1\n";
  for (const auto& [edge, count] : counts)
    out << edge.first << '\t' << edge.second << '\t' << count << '\n';
}

TransitionCounts read_transitions_tsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty transitions file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "mpe-transitions\t1")
    throw DataError("not a transitions file (bad header)");
  TransitionCounts counts;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw DataError("transitions file line " + std::to_string(line_no) +
                      ": expected 3 fields");
    counts[{fields[0], fields[1]}] = std::stoll(fields[2]);
  }
  return counts;
}

void rebuild_candidates(const TransitionCounts& counts, const Vocabulary& vocab,
                        CandidateIndex* candidates, std::vector<int64_t>* next_counts) {
  if (next_counts)
    next_counts->assign(static_cast<size_t>(vocab.nexts.size()), 0);
  for (const auto& [edge, count] : counts) {
    Index cur = vocab.currents.lookup(edge.first);
    Index next = vocab.nexts.lookup(edge.second);
    if (cur < 0 || next < 0)
      throw DataError("transition (" + edge.first + " -> " + edge.second +
                      ") references tokens outside the model vocabulary");
    if (candidates) candidates->add(cur, next);
    if (next_counts) (*next_counts)[static_cast<size_t>(next)] += count;
  }
  if (candidates) candidates->finalize();
}

std::optional<EmbeddingKind> parse_embedding_kind(const std::string& name) {
  if (name == "object") return EmbeddingKind::Object;
  if (name == "time") return EmbeddingKind::Time;
  if (name == "loc_current") return EmbeddingKind::LocCurrent;
  if (name == "loc_next") return EmbeddingKind::LocNext;
  return std::nullopt;
}

void write_embeddings_tsv(std::ostream& out, const EmbeddingStore& store,
                          const Vocabulary& vocab,
                          std::optional<EmbeddingKind> only) {
  out << "kind\ttoken";
  for (Index d = 0; d < store.dim(); ++d) out << "\tv_" << d;
  out << '\n';
  auto dump = [&](EmbeddingKind kind, const char* label, const Matrix& m,
                  const TokenIndexer& tokens) {
    if (only && *only != kind) return;
    char buf[40];
    for (Index r = 0; r < m.rows(); ++r) {
      out << label << '\t' << tokens.token(r);
      for (double v : m.row(r)) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << '\t' << buf;
      }
      out << '\n';
    }
  };
  dump(EmbeddingKind::Object, "object", store.objects, vocab.objects);
  dump(EmbeddingKind::Time, "time", store.slots, vocab.slots);
  dump(EmbeddingKind::LocCurrent, "loc_current", store.currents, vocab.currents);
  dump(EmbeddingKind::LocNext, "loc_next", store.nexts, vocab.nexts);
}

}  // namespace mpe
