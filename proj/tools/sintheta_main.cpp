#include <iostream>

#include "sintheta/config.hpp"

int main(int argc, char** argv) {
  try {
    const sintheta::CliConfig cfg = sintheta::parse_config(argc, argv);
    return sintheta::dispatch(cfg);
  } catch (const sintheta::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
