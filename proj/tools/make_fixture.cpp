// Writes the bundled synthetic CPI panel: make_fixture <out.csv> [seed]
#include <fstream>
#include <iostream>

#include "ragnar/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_fixture <out.csv> [seed]\n";
    return 2;
  }
  ragnar::FixtureOptions opt;
  if (argc > 2) opt.seed = ragnar::text::parse_uint(argv[2]);
  std::ofstream out(argv[1]);
  if (!out) {
    std::cerr << "cannot write " << argv[1] << '\n';
    return 1;
  }
  ragnar::write_fixture_csv(out, opt);
  return 0;
}
