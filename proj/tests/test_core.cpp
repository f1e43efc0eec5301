#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <sstream>

#include "morpheval/error.hpp"
#include "morpheval/loaders.hpp"
#include "morpheval/png_io.hpp"
#include "morpheval/types.hpp"
#include "testutil.hpp"

using namespace morpheval;
using testutil::TempDir;
using testutil::TestRng;

TEST_CASE("provenance serialization is a bijection") {
  CHECK(to_string(MediaProvenance::Digital) == "digital");
  CHECK(to_string(MediaProvenance::PrintScanned) == "print-scanned");
  CHECK(provenance_from_string("digital") == MediaProvenance::Digital);
  CHECK(provenance_from_string("print-scanned") ==
        MediaProvenance::PrintScanned);
  CHECK_THROWS_AS(provenance_from_string("scanned"), Error);
  CHECK_THROWS_AS(provenance_from_string(""), Error);
}

TEST_CASE("scenario labels map bijectively to the four pairings") {
  const char* labels[4] = {"D-D", "D-PS", "PS-D", "PS-PS"};
  for (const char* label : labels) {
    const ScenarioConfig cfg = ScenarioConfig::from_label(label);
    CHECK(cfg.label() == label);
  }
  CHECK(ScenarioConfig::from_label("PS-D").morph_source ==
        MediaProvenance::PrintScanned);
  CHECK(ScenarioConfig::from_label("PS-D").bona_fide_source ==
        MediaProvenance::Digital);
  CHECK_THROWS_AS(ScenarioConfig::from_label("PS-X"), Error);

  const auto vuln = vulnerability_scenario_order();
  REQUIRE(vuln.size() == 4);
  CHECK(vuln[0].label() == "D-D");
  CHECK(vuln[1].label() == "D-PS");
  CHECK(vuln[2].label() == "PS-D");
  CHECK(vuln[3].label() == "PS-PS");

  const auto det = detectability_scenario_order();
  REQUIRE(det.size() == 4);
  CHECK(det[0].label() == "D-D");
  CHECK(det[1].label() == "PS-D");
  CHECK(det[2].label() == "D-PS");
  CHECK(det[3].label() == "PS-PS");
}

TEST_CASE("similarity loader computes derived counts") {
  TempDir dir("sim");
  testutil::write_text(dir.file("s.csv"),
                       "morph_id,subject_index,sample_index,score\n"
                       "m1,1,1,0.9\n"
                       "m1,2,1,0.8\n");
  const MorphScoreSet set = load_similarity_scores(dir.file("s.csv"));
  CHECK(set.morph_count() == 1);
  REQUIRE(set.morphs().size() == 1);
  CHECK(set.morphs()[0].subjects.size() == 2);
  CHECK(set.morphs()[0].subjects[0].sample_scores.size() == 1);
  CHECK(set.morphs()[0].subjects[1].sample_scores.size() == 1);
  CHECK(set.single_sample_per_subject());
}

TEST_CASE("similarity loader rejects bad input") {
  TempDir dir("simbad");
  const std::string header = "morph_id,subject_index,sample_index,score\n";

  testutil::write_text(dir.file("empty.csv"), "");
  CHECK_THROWS_WITH_AS(load_similarity_scores(dir.file("empty.csv")),
                       doctest::Contains("no records"), Error);

  testutil::write_text(dir.file("headeronly.csv"), header);
  CHECK_THROWS_WITH_AS(load_similarity_scores(dir.file("headeronly.csv")),
                       doctest::Contains("no records"), Error);

  testutil::write_text(dir.file("malformed.csv"), header + "m1,1,1\n");
  CHECK_THROWS_WITH_AS(load_similarity_scores(dir.file("malformed.csv")),
                       doctest::Contains(":2:"), Error);

  testutil::write_text(dir.file("dup.csv"),
                       header + "m1,1,1,0.9\nm1,1,1,0.8\n");
  CHECK_THROWS_WITH_AS(load_similarity_scores(dir.file("dup.csv")),
                       doctest::Contains("duplicate"), Error);

  testutil::write_text(dir.file("nan.csv"), header + "m1,1,1,nan\n");
  CHECK_THROWS_AS(load_similarity_scores(dir.file("nan.csv")), Error);

  testutil::write_text(dir.file("gap.csv"),
                       header + "m1,1,1,0.9\nm1,3,1,0.8\n");
  CHECK_THROWS_WITH_AS(load_similarity_scores(dir.file("gap.csv")),
                       doctest::Contains("contiguous"), Error);
}

TEST_CASE("similarity counts match an independent group-by oracle") {
  TestRng rng(101);
  TempDir dir("simoracle");

  // 1000 rows generated directly as CSV text.
  std::ostringstream csv;
  csv << "morph_id,subject_index,sample_index,score\n";
  int rows = 0;
  int morph = 0;
  while (rows < 1000) {
    const int subjects = rng.uniform_int(1, 3);
    for (int n = 1; n <= subjects; ++n) {
      const int samples = rng.uniform_int(1, 4);
      for (int i = 1; i <= samples; ++i) {
        csv << "m" << morph << ',' << n << ',' << i << ','
            << rng.uniform(-1.0, 1.0) << '\n';
        ++rows;
      }
    }
    ++morph;
  }
  testutil::write_text(dir.file("big.csv"), csv.str());

  // Oracle: trivial line-based recount of the same file.
  std::map<std::string, std::map<int, int>> oracle;  // morph -> subject -> I
  {
    std::istringstream in(testutil::read_bytes(dir.file("big.csv")));
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      const std::string id = line.substr(0, c1);
      const int n = std::stoi(line.substr(c1 + 1, c2 - c1 - 1));
      oracle[id][n] += 1;
    }
  }

  const MorphScoreSet set = load_similarity_scores(dir.file("big.csv"));
  CHECK(set.morph_count() == static_cast<int>(oracle.size()));
  CHECK(set.record_count() == 1000);
  for (const auto& m : set.morphs()) {
    REQUIRE(oracle.count(m.id) == 1);
    const auto& subj = oracle.at(m.id);
    CHECK(m.subjects.size() == subj.size());
    for (std::size_t n = 0; n < m.subjects.size(); ++n)
      CHECK(static_cast<int>(m.subjects[n].sample_scores.size()) ==
            subj.at(static_cast<int>(n) + 1));
  }
}

TEST_CASE("similarity round trip is identical field by field") {
  TestRng rng(7);
  TempDir dir("roundtrip");
  for (int iter = 0; iter < 20; ++iter) {
    const auto records =
        testutil::random_similarity_records(rng, 10, 3, 4);
    const MorphScoreSet set = MorphScoreSet::from_records(records);
    write_similarity_scores(set, dir.file("rt.csv"));
    const MorphScoreSet back = load_similarity_scores(dir.file("rt.csv"));
    CHECK(back == set);
    CHECK(back.to_records() == set.to_records());
  }
}

TEST_CASE("score_direction pragma flips scores on load") {
  TempDir dir("dir");
  testutil::write_text(dir.file("asc.csv"),
                       "# score_direction: asc\n"
                       "morph_id,subject_index,sample_index,score\n"
                       "m1,1,1,0.25\n");
  testutil::write_text(dir.file("desc.csv"),
                       "# score_direction: desc\n"
                       "morph_id,subject_index,sample_index,score\n"
                       "m1,1,1,0.25\n");
  CHECK(load_similarity_scores(dir.file("asc.csv"))
            .morphs()[0]
            .subjects[0]
            .sample_scores[0] == 0.25);
  CHECK(load_similarity_scores(dir.file("desc.csv"))
            .morphs()[0]
            .subjects[0]
            .sample_scores[0] == -0.25);

  testutil::write_text(dir.file("bad.csv"),
                       "# score_direction: up\n"
                       "morph_id,subject_index,sample_index,score\n"
                       "m1,1,1,0.25\n");
  CHECK_THROWS_AS(load_similarity_scores(dir.file("bad.csv")), Error);
}

TEST_CASE("classifier loader validates labels and ids") {
  TempDir dir("cls");
  const std::string header = "image_id,label,score,algorithm,provenance\n";

  testutil::write_text(dir.file("ok.csv"),
                       header + "a,bonafide,0.1,,digital\n"
                                "b,morph,0.9,OpenCV,print-scanned\n");
  const auto records = load_classifier_scores(dir.file("ok.csv"));
  REQUIRE(records.size() == 2);
  CHECK(records[0].label == ImageLabel::BonaFide);
  CHECK(!records[0].morph_algorithm.has_value());
  CHECK(records[1].morph_algorithm == std::string("OpenCV"));
  CHECK(records[1].provenance == MediaProvenance::PrintScanned);

  testutil::write_text(dir.file("genuine.csv"),
                       header + "a,genuine,0.1,,digital\n");
  CHECK_THROWS_WITH_AS(load_classifier_scores(dir.file("genuine.csv")),
                       doctest::Contains("unknown label"), Error);

  testutil::write_text(dir.file("dup.csv"),
                       header + "a,bonafide,0.1,,digital\n"
                                "a,morph,0.9,,digital\n");
  CHECK_THROWS_WITH_AS(load_classifier_scores(dir.file("dup.csv")),
                       doctest::Contains("duplicate image_id"), Error);

  testutil::write_text(dir.file("inf.csv"), header + "a,morph,inf,,digital\n");
  CHECK_THROWS_AS(load_classifier_scores(dir.file("inf.csv")), Error);
}

TEST_CASE("classifier loader matches an independent parse on 500 rows") {
  TestRng rng(55);
  TempDir dir("cls500");
  std::ostringstream csv;
  csv << "image_id,label,score,algorithm,provenance\n";
  int expect_bona = 0, expect_morph = 0;
  for (int i = 0; i < 500; ++i) {
    const bool morph = rng.uniform01() < 0.5;
    (morph ? expect_morph : expect_bona) += 1;
    csv << "img" << i << ',' << (morph ? "morph" : "bonafide") << ','
        << rng.uniform(-2.0, 2.0) << ",alg,"
        << (rng.uniform01() < 0.5 ? "digital" : "print-scanned") << '\n';
  }
  testutil::write_text(dir.file("c.csv"), csv.str());
  const auto records = load_classifier_scores(dir.file("c.csv"));
  CHECK(records.size() == 500);
  int bona = 0, morph = 0;
  for (const auto& r : records)
    (r.label == ImageLabel::Morph ? morph : bona) += 1;
  CHECK(bona == expect_bona);
  CHECK(morph == expect_morph);
}

TEST_CASE("impostor loader reads a single score column") {
  TempDir dir("imp");
  testutil::write_text(dir.file("i.csv"), "score\n0.1\n0.5\n-0.25\n");
  const ImposterScoreSet set = load_impostor_scores(dir.file("i.csv"));
  CHECK(set.scores == std::vector<double>{0.1, 0.5, -0.25});
  testutil::write_text(dir.file("empty.csv"), "score\n");
  CHECK_THROWS_AS(load_impostor_scores(dir.file("empty.csv")), Error);
}

TEST_CASE("landmark loader enforces the 68-point contract") {
  TempDir dir("lm");
  TestRng rng(3);
  const LandmarkSet set = testutil::random_landmarks(rng, 200, 160);
  testutil::write_text(dir.file("ok.json"), testutil::landmarks_json(set));
  const LandmarkSet loaded = load_landmarks(dir.file("ok.json"));
  CHECK(loaded == set);

  LandmarkSet short_set = set;
  short_set.points.pop_back();
  testutil::write_text(dir.file("short.json"),
                       testutil::landmarks_json(short_set));
  CHECK_THROWS_WITH_AS(load_landmarks(dir.file("short.json")),
                       doctest::Contains("expected 68"), Error);

  // Half-open bound: x == width is out, width - epsilon is in.
  LandmarkSet edge = set;
  edge.points[0] = Point{200.0, 0.0};
  testutil::write_text(dir.file("edge.json"), testutil::landmarks_json(edge));
  CHECK_THROWS_WITH_AS(load_landmarks(dir.file("edge.json")),
                       doctest::Contains("out of bounds"), Error);
  edge.points[0] = Point{199.9999, 0.0};
  testutil::write_text(dir.file("edge2.json"), testutil::landmarks_json(edge));
  CHECK_NOTHROW(load_landmarks(dir.file("edge2.json")));
}

TEST_CASE("png round trip preserves pixels and ppi metadata") {
  TempDir dir("png");
  TestRng rng(11);
  ImageBuffer img = testutil::random_image(rng, 37, 23);
  img.set_ppi(300);
  write_png(img, dir.file("img.png"));
  const ImageBuffer back = read_png(dir.file("img.png"));
  CHECK(back == img);
  CHECK(back.ppi() == std::optional<int>(300));

  ImageBuffer no_ppi = testutil::random_image(rng, 8, 8);
  write_png(no_ppi, dir.file("no_ppi.png"));
  CHECK(!read_png(dir.file("no_ppi.png")).ppi().has_value());
}

TEST_CASE("png reader rejects alpha with an explicit error") {
  TempDir dir("pngalpha");
  // Minimal 1x1 RGBA PNG, hand-assembled.
  static const unsigned char rgba[] = {
      0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
      0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x01,
      0x08, 0x06, 0x00, 0x00, 0x00, 0x1f, 0x15, 0xc4, 0x89, 0x00, 0x00, 0x00,
      0x0d, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x62, 0xfa, 0xcf, 0xc0, 0x50,
      0x0f, 0x00, 0x00, 0x00, 0xff, 0xff, 0x03, 0x00, 0x05, 0xfe, 0x02, 0xfe,
      0xa7, 0x35, 0x81, 0x84, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44,
      0xae, 0x42, 0x60, 0x82};
  std::ofstream out(dir.file("rgba.png"), std::ios::binary);
  out.write(reinterpret_cast<const char*>(rgba), sizeof(rgba));
  out.close();
  CHECK_THROWS_WITH_AS(read_png(dir.file("rgba.png")),
                       doctest::Contains("alpha"), Error);
}
