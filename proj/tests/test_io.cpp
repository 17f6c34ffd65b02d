#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>

#include "distill/datagen.hpp"
#include "distill/embedding_file.hpp"
#include "distill/errors.hpp"
#include "distill/eval.hpp"
#include "distill/formats.hpp"
#include "distill/selection.hpp"

using namespace distill;
namespace fs = std::filesystem;

namespace {

EmbeddingSet random_set(std::size_t n, std::uint32_t d, std::uint32_t c, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  EmbeddingSet s;
  s.dim = d;
  s.num_classes = c;
  for (std::size_t i = 0; i < n; ++i) {
    Vector v(d);
    for (double& x : v) x = nd(gen);
    s.push_back(v, static_cast<ClassId>(i % c));
  }
  return s;
}

void put_u32(std::vector<std::uint8_t>& b, std::size_t off, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[off + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

void reseal(std::vector<std::uint8_t>& b) {
  put_u32(b, b.size() - 4, crc32_ieee(std::span<const std::uint8_t>(b.data(), b.size() - 4)));
}

FormatErrorKind kind_of(const std::vector<std::uint8_t>& b, std::uint64_t* offset = nullptr) {
  try {
    decode_embeddings(b);
  } catch (const FormatError& e) {
    if (offset) *offset = e.offset();
    return e.kind();
  }
  ADD_FAILURE() << "decode accepted corrupt bytes";
  return FormatErrorKind::kTruncated;
}

fs::path temp_dir() {
  auto p = fs::temp_directory_path() / ("distill_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Crc32, CheckValue) {
  const char* s = "123456789";
  EXPECT_EQ(crc32_ieee(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s), 9)), 0xCBF43926u);
}

TEST(EmbeddingFile, LayoutOfSmallFile) {
  EmbeddingSet s;
  s.dim = 2;
  s.num_classes = 3;
  s.push_back(Vector{1.0, -2.0}, 2);
  const auto b = encode_embeddings(s);
  ASSERT_EQ(b.size(), 24u + 4 + 8);
  EXPECT_EQ(std::memcmp(b.data(), "EMB1", 4), 0);
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(b[8], 1);
  EXPECT_EQ(b[12], 2);
  EXPECT_EQ(b[16], 3);
  EXPECT_EQ(b[20], 2);
  float f;
  std::memcpy(&f, &b[24], 4);
  EXPECT_EQ(f, 1.0f);
}

TEST(EmbeddingFile, EmptySetIs24Bytes) {
  EmbeddingSet s;
  s.dim = 4;
  s.num_classes = 2;
  const auto b = encode_embeddings(s);
  EXPECT_EQ(b.size(), 24u);
  const auto back = decode_embeddings(b);
  EXPECT_EQ(back.size(), 0u);
  EXPECT_EQ(back.dim, 4u);
}

TEST(EmbeddingFile, RoundTripByteExact) {
  const auto s = random_set(100, 16, 5, 1);
  const auto dir = temp_dir();
  write_embeddings(s, dir / "a.emb");
  const auto back = read_embeddings(dir / "a.emb");
  EXPECT_EQ(back, s);
  write_embeddings(back, dir / "b.emb");
  EXPECT_EQ(read_file_bytes(dir / "a.emb"), read_file_bytes(dir / "b.emb"));
  EXPECT_FALSE(fs::exists(dir / "a.emb.tmp"));
  fs::remove_all(dir);
}

TEST(EmbeddingFile, CorruptionKinds) {
  const auto good = encode_embeddings(random_set(10, 3, 2, 2));
  std::uint64_t off = 0;

  auto flipped = good;
  flipped[40] ^= 0x10;
  EXPECT_EQ(kind_of(flipped, &off), FormatErrorKind::kCrcMismatch);
  EXPECT_EQ(off, good.size() - 4);

  auto magic = good;
  magic[0] = 'X';
  EXPECT_EQ(kind_of(magic, &off), FormatErrorKind::kBadMagic);
  EXPECT_EQ(off, 0u);

  auto version = good;
  put_u32(version, 4, 2);
  EXPECT_EQ(kind_of(version, &off), FormatErrorKind::kBadVersion);
  EXPECT_EQ(off, 4u);

  auto cut = good;
  cut.resize(cut.size() - 9);
  EXPECT_EQ(kind_of(cut), FormatErrorKind::kTruncated);
  EXPECT_EQ(kind_of(std::vector<std::uint8_t>(good.begin(), good.begin() + 10)), FormatErrorKind::kTruncated);

  auto longer = good;
  longer.push_back(0);
  EXPECT_EQ(kind_of(longer), FormatErrorKind::kTrailingBytes);

  auto label = good;
  put_u32(label, 20 + 4 * 3, 2);
  reseal(label);
  EXPECT_EQ(kind_of(label, &off), FormatErrorKind::kLabelOutOfRange);
  EXPECT_EQ(off, 32u);

  auto nan = good;
  const float q = std::nanf("");
  std::memcpy(&nan[20 + 40 + 8], &q, 4);
  reseal(nan);
  EXPECT_EQ(kind_of(nan, &off), FormatErrorKind::kNonFiniteValue);
  EXPECT_EQ(off, 68u);
}

TEST(EmbeddingFile, ErrorsAreDataErrors) {
  EXPECT_THROW(read_embeddings("/nonexistent/path.emb"), DataError);
  const FormatError e(FormatErrorKind::kCrcMismatch, 12, "x");
  EXPECT_EQ(std::string(e.what()).rfind("CrcMismatch at byte 12", 0), 0u);
}

TEST(Manifest, RoundTripAndCheck) {
  Manifest m{{"walk", "run"}, "unit test", "unspecified", {1, 2}};
  EXPECT_EQ(parse_manifest(render_manifest(m)), m);
  auto s = random_set(4, 2, 2, 3);
  EXPECT_NO_THROW(check_manifest(m, s));
  s.num_classes = 3;
  EXPECT_THROW(check_manifest(m, s), DataError);
  EXPECT_THROW(parse_manifest("{"), DataError);
  EXPECT_THROW(parse_manifest("{\"source\": \"x\"}"), DataError);
}

TEST(Scores, RoundTripAndDefaults) {
  const std::vector<double> v{0.5, 0.0, 1e-300, 3.25};
  EXPECT_EQ(parse_scores(render_scores(v), 4), v);
  EXPECT_EQ(parse_scores("2\t1.5\n", 4), (std::vector<double>{0, 0, 1.5, 0}));
  EXPECT_EQ(parse_scores("", 2), (std::vector<double>{0, 0}));
}

TEST(Scores, Rejects) {
  EXPECT_THROW(parse_scores("1\t1\n1\t2\n", 3), DataError);
  EXPECT_THROW(parse_scores("3\t1\n", 3), DataError);
  EXPECT_THROW(parse_scores("1 1\n", 3), DataError);
  EXPECT_THROW(parse_scores("x\t1\n", 3), DataError);
  EXPECT_THROW(parse_scores("1\tabc\n", 3), DataError);
  EXPECT_THROW(parse_scores("1\tnan\n", 3), DataError);
}

TEST(Numbers, SixSignificantDigits) {
  EXPECT_EQ(format_sig6(0.123456789), "0.123457");
  EXPECT_EQ(format_sig6(41.47), "41.47");
  EXPECT_EQ(format_sig6(1.0), "1");
  EXPECT_EQ(format_pm(MetricSummary{41.47, 0.32}), "41.47\xC2\xB1" "0.32");
  const auto p = parse_pm("0.906\xC2\xB1" "0.0211849");
  EXPECT_DOUBLE_EQ(p.mean, 0.906);
  EXPECT_DOUBLE_EQ(p.std, 0.0211849);
  EXPECT_THROW(parse_pm("0.5+-0.1"), DataError);
  EXPECT_THROW(parse_pm("abc\xC2\xB1" "0.1"), DataError);
  EXPECT_DOUBLE_EQ(round_sig6(0.123456789), 0.123457);
}

TEST(SelectionFile, RoundTrip) {
  BenchmarkSpec spec;
  spec.classes = 3;
  spec.per_class = 12;
  spec.dim = 5;
  const auto b = gen_benchmark(spec);
  SelectionConfig cfg;
  cfg.method = Method::kGreedyObjective;
  cfg.vpc = 3;
  cfg.master_seed = 17;
  const auto r = distill::distill(b.train, cfg);
  const auto text = render_selection(cfg, r);
  const auto back = parse_selection(text);
  EXPECT_TRUE(back.same_selection(r));
  EXPECT_EQ(back.per_class_objective, r.per_class_objective);
  EXPECT_EQ(render_selection(cfg, back), text);
  EXPECT_EQ(text.find("wall_seconds"), std::string::npos);
  EXPECT_NE(render_selection(cfg, r, true).find("wall_seconds"), std::string::npos);
}

TEST(ReportFile, RoundTripAndTable) {
  BenchmarkSpec spec;
  spec.classes = 3;
  spec.per_class = 15;
  spec.dim = 5;
  const auto b = gen_benchmark(spec);
  SelectionConfig cfg;
  cfg.method = Method::kRandom;
  cfg.vpc = 2;
  const auto rep = run_experiment(b.train, b.test, cfg, 3);
  const auto text = render_report(rep);
  EXPECT_NE(text.find("\xC2\xB1"), std::string::npos);
  const auto back = parse_report(text);
  EXPECT_EQ(render_report(back), text);
  EXPECT_EQ(back.runs, 3u);
  EXPECT_EQ(back.acc.mean, round_sig6(rep.acc.mean));
  EXPECT_EQ(back.per_run[1].metrics.macro_auc, round_sig6(rep.per_run[1].metrics.macro_auc));
  EXPECT_TRUE(back.per_run[2].selection.same_selection(rep.per_run[2].selection));

  const auto csv = report_table_csv(back);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "run,metric,value");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 3 * 3);
  EXPECT_EQ(csv, report_table_csv(rep));
  EXPECT_THROW(parse_report("{\"format\": \"other\"}"), DataError);
}
