#include <sstream>

#include <doctest.h>

#include "lts/error.hpp"
#include "lts/netspec.hpp"

using namespace lts;
using namespace lts::net;

namespace {

const std::filesystem::path kData = LTS_DATA_DIR;

struct Row {
  const char* name;
  Shape shape;
};

// Architecture table, all 11 named layers.
const Row kTable[] = {
    {"conv_0", {64, 512, 48}},   {"conv_1", {64, 512, 48}},     {"db_0", {64, 512, 144}},
    {"db_1", {32, 256, 272}},    {"db_2", {16, 128, 432}},      {"db_3", {16, 128, 240}},
    {"up_conv_0", {32, 256, 240}}, {"db_4", {32, 256, 128}},    {"up_conv_1", {64, 512, 128}},
    {"db_5", {64, 512, 96}},     {"conv_2", {64, 512, 4}},
};

}  // namespace

TEST_CASE("dense block channel arithmetic") {
  LayerSpec db;
  db.name = "db";
  db.kind = LayerKind::DenseBlock;
  db.growth_rate = 16;
  db.repetitions = 6;
  CHECK(derive_shapes(std::span(&db, 1), {64, 512, 48}).layers[0].output.c == 144);
  db.repetitions = 10;
  CHECK(derive_shapes(std::span(&db, 1), {16, 128, 272}).layers[0].output.c == 432);
  db.repetitions = 15;
  db.emit_new_only = true;
  CHECK(derive_shapes(std::span(&db, 1), {16, 128, 432}).layers[0].output.c == 240);
}

TEST_CASE("conv weight formulas") {
  CHECK(conv_weights(3, 3, 16, 16, false) == 2304);
  CHECK(conv_weights(3, 3, 16, 16, true) == 400);
  for (std::size_t cin = 1; cin <= 64; ++cin) {
    for (std::size_t cout = 2; cout <= 64; ++cout) {
      CHECK(conv_weights(3, 3, cin, cout, true) < conv_weights(3, 3, cin, cout, false));
    }
  }
}

TEST_CASE("shipped specs reproduce every row of the architecture table") {
  for (const char* file : {"dblidarnet.netspec", "dblidarnet_db3_standard.netspec"}) {
    CAPTURE(file);
    const auto layers = load_netspec(kData / file);
    const ShapeReport r = derive_shapes(layers, {64, 512, 5});
    for (const Row& row : kTable) {
      const LayerShape* l = r.find(row.name);
      REQUIRE(l != nullptr);
      CHECK(l->output == row.shape);
    }
    CHECK(r.warnings.empty());
    // Four-fold down-sampling from the input to db_3.
    CHECK(r.find("db_3")->output.h * 4 == 64);
    CHECK(r.find("db_3")->output.w * 4 == 512);
  }
}

TEST_CASE("parameter totals") {
  // Weights-only, 3x3 kernels; pinned from the calculator and checked by hand
  // against the closed-form dense-block sums.
  const auto ablation = count_params(load_netspec(kData / "dblidarnet_db3_standard.netspec"), {64, 512, 5});
  CHECK(ablation.standard_decoder == 3592944);
  CHECK(ablation.separable_decoder == 2829440);
  CHECK(ablation.as_specified == 2829440);
  CHECK(ablation.all_standard == 3592944);

  const auto table = count_params(load_netspec(kData / "dblidarnet.netspec"), {64, 512, 5});
  CHECK(table.standard_decoder == 2621904);
  CHECK(table.separable_decoder == 1858400);
  CHECK(table.all_standard == 3592944);

  // db_0: 9*16*(48+64+...+128) = 76032
  const auto* db0 = &ablation.layers[2];
  CHECK(db0->name == "db_0");
  CHECK(db0->standard == 76032);
  CHECK(ablation.biases > 0);
  CHECK(ablation.norm > 0);
}

TEST_CASE("width 324 floor-halves through the pooling stages") {
  const auto layers = load_netspec(kData / "dblidarnet.netspec");
  const ShapeReport r = derive_shapes(layers, {64, 324, 5});
  CHECK(r.find("db_0")->output.w == 324);
  CHECK(r.find("db_1")->output.w == 162);
  CHECK(r.find("db_2")->output.w == 81);
  CHECK(r.find("db_5")->output.w == 324);
}

TEST_CASE("odd sizes and mismatched skips") {
  auto layers = parse_netspec("a conv out=8\np max_pool\nb conv out=8\nu up_conv\nc conv out=4 skip=a\n");
  const ShapeReport ok = derive_shapes(layers, {8, 8, 3});
  CHECK(ok.find("c")->input.c == 16);

  const ShapeReport odd = derive_shapes(parse_netspec("p max_pool\nu up_conv\n"), {8, 81, 3});
  CHECK(odd.warnings.size() == 2);

  // With an odd width the skip no longer lines up.
  try {
    derive_shapes(layers, {8, 9, 3});
    FAIL("expected mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
    const std::string msg = e.what();
    CHECK(msg.find("a (") != std::string::npos);
    CHECK(msg.find(" c ") != std::string::npos);
  }
  CHECK_THROWS_AS(derive_shapes(parse_netspec("c conv out=4 skip=later\nlater conv out=4\n"), {8, 8, 3}), Error);
}

TEST_CASE("spec grammar errors name the line") {
  CHECK_THROWS_AS(parse_netspec(""), Error);
  CHECK_THROWS_AS(parse_netspec("# only a comment\n"), Error);
  try {
    parse_netspec("a conv out=8\nb dense_block reps=0 growth=16\n", "net.txt");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("net.txt:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_netspec("a conv\n"), Error);
  CHECK_THROWS_AS(parse_netspec("a frobnicate\n"), Error);
  CHECK_THROWS_AS(parse_netspec("a conv out=8 kernel=3\n"), Error);
  CHECK_THROWS_AS(parse_netspec("a conv out=x\n"), Error);
  CHECK(parse_shape("64x324x5") == Shape{64, 324, 5});
  CHECK_THROWS_AS(parse_shape("64x324"), Error);
}

TEST_CASE("report printout") {
  const auto layers = load_netspec(kData / "dblidarnet.netspec");
  std::ostringstream out;
  print_report(derive_shapes(layers, {64, 512, 5}), count_params(layers, {64, 512, 5}), out);
  CHECK(out.str().find("64x512x144") != std::string::npos);
  CHECK(out.str().find("1858400") != std::string::npos);
}
