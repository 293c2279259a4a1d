#include "recurweight/cli.hpp"
#include "recurweight/error.hpp"

#include <iostream>
#include <string_view>

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view a = argv[i];
    if (a == "-h" || a == "--help") {
      std::cout << recurweight::usage();
      return 0;
    }
  }
  try {
    const auto manifest = recurweight::parse_args(argc, argv);
    return recurweight::run_command(manifest, std::cerr);
  } catch (const recurweight::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n' << recurweight::usage();
    return 2;
  }
}
