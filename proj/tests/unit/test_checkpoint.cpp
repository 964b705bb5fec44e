// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <string>

#include "doctest.h"
#include "vdib/checkpoint.hpp"
#include "vdib/errors.hpp"

using namespace vdib;

namespace {

Model sample_model(OutputActivation output = OutputActivation::Sigmoid) {
  ModelSpec spec;
  spec.k = 3;
  spec.n_in = 8;
  spec.steps = 4;
  spec.hidden = 5;
  spec.classes = 3;
  spec.window_a = 6;
  spec.window_b = 2;
  spec.output = output;
  Model m = init_model(spec, 21);
  // Awkward values that a decimal printer could round.
  m.encoder.w_ff[0] = 0.1;
  m.encoder.w_ff[1] = -std::numeric_limits<double>::denorm_min();
  m.encoder.gamma[0] = std::nextafter(1.0, 2.0);
  m.decoder.b2[1] = -0.0;
  m.decoder.w1[2] = 1e300;
  return m;
}

void check_bit_identical(const Model& a, const Model& b) {
  auto same = [](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::signbit(x[i]) != std::signbit(y[i]) || !(x[i] == y[i])) return false;
    }
    return true;
  };
  CHECK(a.encoder.k == b.encoder.k);
  CHECK(a.encoder.n_in == b.encoder.n_in);
  CHECK(same(a.encoder.kernel_a.coefficients, b.encoder.kernel_a.coefficients));
  CHECK(same(a.encoder.kernel_b.coefficients, b.encoder.kernel_b.coefficients));
  CHECK(same(a.encoder.w_ff, b.encoder.w_ff));
  CHECK(same(a.encoder.w_fb, b.encoder.w_fb));
  CHECK(same(a.encoder.gamma, b.encoder.gamma));
  CHECK(a.decoder.in_dim == b.decoder.in_dim);
  CHECK(a.decoder.hidden == b.decoder.hidden);
  CHECK(a.decoder.classes == b.decoder.classes);
  CHECK(a.decoder.output == b.decoder.output);
  CHECK(same(a.decoder.w1, b.decoder.w1));
  CHECK(same(a.decoder.b1, b.decoder.b1));
  CHECK(same(a.decoder.w2, b.decoder.w2));
  CHECK(same(a.decoder.b2, b.decoder.b2));
}

std::string text_of(const Model& m) {
  std::ostringstream out;
  write_checkpoint(out, m);
  return out.str();
}

Model read_text(const std::string& s) {
  std::istringstream in(s);
  return read_checkpoint(in);
}

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
  const auto at = s.find(from);
  REQUIRE(at != std::string::npos);
  return s.replace(at, from.size(), to);
}

}  // namespace

TEST_CASE("round trip is bit-exact") {
  for (auto output : {OutputActivation::Sigmoid, OutputActivation::Softmax}) {
    const Model m = sample_model(output);
    const std::string text = text_of(m);
    const Model back = read_text(text);
    check_bit_identical(m, back);
    CHECK(text_of(back) == text);
  }
}

TEST_CASE("file round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "vdib_checkpoint_test";
  std::filesystem::create_directories(dir);
  const Model m = sample_model();
  save_checkpoint(dir / "m.txt", m);
  check_bit_identical(m, load_checkpoint(dir / "m.txt"));
  CHECK_THROWS(load_checkpoint(dir / "missing.txt"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("layout") {
  const std::string text = text_of(sample_model());
  CHECK(text.rfind("vdib-checkpoint 1\n", 0) == 0);
  std::size_t last = 0;
  for (const char* name : {"encoder.kernel_a 1 6", "encoder.kernel_b 1 2", "encoder.w_ff 3 8", "encoder.w_fb 1 3",
                           "encoder.gamma 1 3", "decoder.w1 5 12", "decoder.b1 1 5", "decoder.w2 3 5",
                           "decoder.b2 1 3"}) {
    const auto at = text.find(std::string("block ") + name + "\n");
    CHECK_MESSAGE(at != std::string::npos, name);
    CHECK(at > last);
    last = at;
  }
}

TEST_CASE("malformed input") {
  const std::string good = text_of(sample_model());
  CHECK_THROWS_AS(read_text(""), ParseError);
  CHECK_THROWS_AS(read_text(replace_once(good, "vdib-checkpoint 1", "vdib-checkpoint 7")), ParseError);
  CHECK_THROWS_AS(read_text(replace_once(good, "block encoder.w_fb", "block encoder.w_xx")), ParseError);
  CHECK_THROWS_AS(read_text(good.substr(0, good.size() / 2)), ParseError);
  CHECK_THROWS_AS(read_text(replace_once(good, "block decoder.b2 1 3", "block decoder.b2 1 4")),
                  std::runtime_error);
  CHECK_THROWS_AS(read_text(replace_once(good, "hidden=5", "hidden=6")), std::runtime_error);

  SUBCASE("bad numbers carry their line") {
    std::istringstream in(good);
    std::string line;
    std::string out;
    std::size_t n = 0, bad_line = 0;
    while (std::getline(in, line)) {
      ++n;
      if (bad_line == 0 && line.rfind("block encoder.gamma", 0) == 0) {
        out += line + "\n";
        std::getline(in, line);
        ++n;
        bad_line = n;
        line = "0x1p+0 zebra 0x1p+0";
      }
      out += line + "\n";
    }
    try {
      read_text(out);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == bad_line);
    }
  }
}
