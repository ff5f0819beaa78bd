// Minimal external simulator speaking the row protocol, used by tests.
//   default: emits m1 = x1 + xi1 and m2 = x1 * xi1
//   argv[1] == "nan":  emits NaN in row 2
//   argv[1] == "hang": never answers (timeout path)
//   argv[1] == "fail": exits nonzero after the header
#include <chrono>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "";
  if (mode == "hang") {
    std::this_thread::sleep_for(std::chrono::seconds(3600));
    return 0;
  }
  std::string line;
  if (!std::getline(std::cin, line)) return 1;  // header
  std::printf("m1,m2\n");
  if (mode == "fail") return 9;
  int row = 0;
  while (std::getline(std::cin, line)) {
    ++row;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(std::strtod(field.c_str(), nullptr));
    const double x1 = fields.at(0);
    const double xi1 = fields.at(fields.size() / 2);
    if (mode == "nan" && row == 2) {
      std::printf("nan,0\n");
    } else {
      std::printf("%.17g,%.17g\n", x1 + xi1, x1 * xi1);
    }
  }
  return 0;
}
