// Runs the acceptance battery and prints one PASS/FAIL line per criterion.
#include <CLI11.hpp>

#include <iostream>

#include "sglab/verify.hpp"

int main(int argc, char** argv) {
  CLI::App app{"sglab acceptance battery"};
  std::string level = "full";
  sglab::VerifyOptions opt;
  app.add_option("--level", level)->check(CLI::IsMember({"quick", "full"}));
  app.add_option("--out", opt.out_dir, "directory for the sweep table and plots");
  app.add_option("--only", opt.only)->delimiter(',');
  app.add_option("--threads", opt.threads)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  opt.full = level == "full";

  const sglab::VerifyReport rep = sglab::verify_suite(opt);
  std::cout << rep.summary();
  int passed = 0;
  for (const auto& r : rep.results) passed += r.passed ? 1 : 0;
  std::cout << passed << "/" << rep.results.size() << " criteria passed (" << level << ")\n";
  return rep.all_passed() ? 0 : 1;
}
