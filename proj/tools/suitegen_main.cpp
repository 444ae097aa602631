#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "suitegen.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Regenerates the committed circuit suite (c17 plus synthetic stand-ins)"};
  std::string out_dir = "circuits";
  bool list_only = false;
  app.add_option("--out", out_dir, "Directory to write the bench files into")
      ->capture_default_str();
  app.add_flag("--list", list_only, "Print the file names without writing");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto suite = htwb::suitegen::generate_suite();
    for (const auto& file : suite) {
      if (list_only) {
        std::cout << file.filename << "\n";
        continue;
      }
      const std::filesystem::path path = std::filesystem::path(out_dir) / file.filename;
      std::filesystem::create_directories(path.parent_path());
      std::ofstream stream(path, std::ios::binary | std::ios::trunc);
      if (!stream) {
        std::cerr << "cannot write " << path.string() << "\n";
        return 2;
      }
      stream << file.text;
      std::cout << "wrote " << path.string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
