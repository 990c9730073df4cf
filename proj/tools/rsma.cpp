#include <iostream>

#include "rsma/cli.hpp"

int main(int argc, char** argv) {
  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    const auto cfg = rsma::cli::parse_args(args);
    return rsma::cli::run(cfg);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::cerr << err.dump() << std::endl;
    return 1;
  }
}
