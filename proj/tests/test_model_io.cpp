#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mpe/errors.hpp"
#include "mpe/model_io.hpp"
#include "mpe/store.hpp"
#include "mpe/vocab.hpp"

using namespace mpe;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() / name).string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

Vocabulary sample_vocab() {
  Vocabulary v;
  v.objects.add("taxi-7");
  v.objects.add("taxi-12");
  v.slots.add("0");
  v.slots.add("1");
  v.slots.add("2");
  v.currents.add("A");
  v.currents.add("B");
  v.nexts.add("B");
  v.nexts.add("C");
  return v;
}

EmbeddingStore sample_store(const Vocabulary& v) {
  auto store = init_store(v, 3, 17);
  // Plant values that stress exact round-tripping.
  store.objects.row(0)[0] = 0.1;  // not exactly representable
  store.nexts.row(1)[2] = -1.0 / 3.0;
  store.slots.row(2)[1] = 1e-300;
  return store;
}

}  // namespace

TEST_CASE("model files round trip bit for bit") {
  auto vocab = sample_vocab();
  auto store = sample_store(vocab);
  ComponentMask mask{true, false};
  TempFile f("mpe_model_roundtrip.bin");
  write_model_file(f.path, store, mask, vocab);

  auto back = read_model_file(f.path);
  CHECK(back.mask.use_object == true);
  CHECK(back.mask.use_time == false);
  CHECK(back.vocab.objects.tokens() == vocab.objects.tokens());
  CHECK(back.vocab.slots.tokens() == vocab.slots.tokens());
  CHECK(back.vocab.currents.tokens() == vocab.currents.tokens());
  CHECK(back.vocab.nexts.tokens() == vocab.nexts.tokens());
  CHECK(back.store.dim() == 3);
  CHECK(back.store.objects.data() == store.objects.data());
  CHECK(back.store.slots.data() == store.slots.data());
  CHECK(back.store.currents.data() == store.currents.data());
  CHECK(back.store.nexts.data() == store.nexts.data());
}

TEST_CASE("two writes of the same model are byte identical") {
  auto vocab = sample_vocab();
  auto store = sample_store(vocab);
  TempFile a("mpe_model_a.bin"), b("mpe_model_b.bin");
  write_model_file(a.path, store, {true, true}, vocab);
  write_model_file(b.path, store, {true, true}, vocab);
  std::ifstream fa(a.path, std::ios::binary), fb(b.path, std::ios::binary);
  std::string ca((std::istreambuf_iterator<char>(fa)), {});
  std::string cb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(ca == cb);
  CHECK(!ca.empty());
  CHECK(ca.substr(0, 8) == "MPEMODEL");
}

TEST_CASE("reader rejects foreign, truncated, and future files") {
  TempFile f("mpe_model_bad.bin");
  {
    std::ofstream out(f.path, std::ios::binary);
    out << "NOTMODEL" << std::string(64, '\0');
  }
  CHECK_THROWS_AS(read_model_file(f.path), DataError);

  auto vocab = sample_vocab();
  auto store = sample_store(vocab);
  write_model_file(f.path, store, {true, true}, vocab);
  auto whole = [&] {
    std::ifstream in(f.path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
  }();
  {
    std::ofstream out(f.path, std::ios::binary);
    out << whole.substr(0, whole.size() / 2);
  }
  CHECK_THROWS_AS(read_model_file(f.path), DataError);

  // Bump the version field (bytes 8..11, little endian).
  std::string future = whole;
  future[8] = 99;
  {
    std::ofstream out(f.path, std::ios::binary);
    out << future;
  }
  CHECK_THROWS_AS(read_model_file(f.path), DataError);

  CHECK_THROWS_AS(read_model_file("/nonexistent/dir/model.bin"), DataError);
}

TEST_CASE("shape mismatches are caught at write time") {
  auto vocab = sample_vocab();
  auto store = sample_store(vocab);
  store.currents = Matrix(5, 3);  // vocab says 2 currents
  TempFile f("mpe_model_shape.bin");
  CHECK_THROWS_AS(write_model_file(f.path, store, {true, true}, vocab), DataError);
}

TEST_CASE("transition counts aggregate duplicates") {
  std::vector<TokenQuadruple> quads = {
      {"v", "0", "A", "B"}, {"w", "3", "A", "B"}, {"v", "1", "B", "C"}};
  auto counts = count_transitions(quads);
  REQUIRE(counts.size() == 2);
  CHECK(counts.at({"A", "B"}) == 2);
  CHECK(counts.at({"B", "C"}) == 1);
}

TEST_CASE("transitions round trip through TSV") {
  TransitionCounts counts;
  counts[{"A", "B"}] = 41;
  counts[{"token with space", "C"}] = 1;
  std::stringstream buf;
  write_transitions_tsv(buf, counts);
  CHECK(buf.str().rfind("mpe-transitions\t1\n", 0) == 0);
  auto back = read_transitions_tsv(buf);
  CHECK(back == counts);

  std::stringstream bad("wrong-header\t1\nA\tB\t3\n");
  CHECK_THROWS_AS(read_transitions_tsv(bad), DataError);
}

TEST_CASE("rebuild_candidates reproduces the training-time index") {
  std::vector<TokenQuadruple> quads;
  for (int i = 0; i < 30; ++i)
    quads.push_back({"v" + std::to_string(i % 2), std::to_string(i % 3),
                     "L" + std::to_string(i % 4), "L" + std::to_string((i + 1) % 5)});
  auto set = build_vocab_and_index(quads);
  auto counts = count_transitions(quads);

  CandidateIndex rebuilt;
  std::vector<int64_t> next_counts;
  rebuild_candidates(counts, set.vocab, &rebuilt, &next_counts);
  CHECK(next_counts == set.next_counts);
  for (Index c = 0; c < set.vocab.currents.size(); ++c)
    CHECK(rebuilt.candidates(c) == set.candidates.candidates(c));
}

TEST_CASE("rebuild_candidates rejects tokens outside the vocabulary") {
  auto vocab = sample_vocab();
  TransitionCounts counts;
  counts[{"A", "B"}] = 1;
  counts[{"unknown", "B"}] = 1;
  CandidateIndex idx;
  std::vector<int64_t> next_counts;
  CHECK_THROWS_AS(rebuild_candidates(counts, vocab, &idx, &next_counts), DataError);
}

TEST_CASE("embedding kinds parse from their CLI names") {
  CHECK(parse_embedding_kind("object") == EmbeddingKind::Object);
  CHECK(parse_embedding_kind("time") == EmbeddingKind::Time);
  CHECK(parse_embedding_kind("loc_current") == EmbeddingKind::LocCurrent);
  CHECK(parse_embedding_kind("loc_next") == EmbeddingKind::LocNext);
  CHECK(!parse_embedding_kind("spacetime").has_value());
}

TEST_CASE("embedding export emits one row per token with D value columns") {
  auto vocab = sample_vocab();
  auto store = sample_store(vocab);

  std::stringstream all;
  write_embeddings_tsv(all, store, vocab);
  std::string line;
  int rows = 0, time_rows = 0;
  std::getline(all, line);  // header
  CHECK(line == "kind\ttoken\tv_0\tv_1\tv_2");
  while (std::getline(all, line)) {
    ++rows;
    if (line.rfind("time\t", 0) == 0) ++time_rows;
    CHECK(std::count(line.begin(), line.end(), '\t') == 4);  // kind, token, 3 values
  }
  CHECK(rows == 2 + 3 + 2 + 2);
  CHECK(time_rows == 3);

  std::stringstream only;
  write_embeddings_tsv(only, store, vocab, EmbeddingKind::Time);
  int only_rows = 0;
  std::getline(only, line);
  while (std::getline(only, line)) ++only_rows;
  CHECK(only_rows == 3);

  // Values survive a %.17g round trip exactly.
  std::stringstream objects;
  write_embeddings_tsv(objects, store, vocab, EmbeddingKind::Object);
  std::getline(objects, line);  // header
  std::getline(objects, line);  // taxi-7 row
  std::vector<std::string> fields;
  std::stringstream row(line);
  std::string field;
  while (std::getline(row, field, '\t')) fields.push_back(field);
  REQUIRE(fields.size() == 5);
  CHECK(fields[0] == "object");
  CHECK(fields[1] == "taxi-7");
  CHECK(std::stod(fields[2]) == store.objects.row(0)[0]);
}
