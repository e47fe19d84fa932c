#pragma once

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "pnpsgs/image.hpp"
#include "pnpsgs/rng.hpp"

namespace testutil {

inline pnpsgs::Image random_image(int h, int w, int c, pnpsgs::Rng& rng, double lo = 0.0,
                                  double hi = 1.0) {
    pnpsgs::Image img(h, w, c);
    for (double& v : img.data()) v = lo + (hi - lo) * rng.uniform();
    return img;
}

/// Smooth synthetic test image with edges and gradients.
inline pnpsgs::Image synthetic_image(int h, int w, int c) {
    pnpsgs::Image img(h, w, c);
    for (int ch = 0; ch < c; ++ch)
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < w; ++j) {
                double v = 0.5 + 0.25 * std::sin(2.0 * 3.14159265358979 * i / h * (ch + 1)) *
                                     std::cos(2.0 * 3.14159265358979 * j / w);
                if (i > h / 2 && j > w / 2) v += 0.2;
                if ((i - h / 3) * (i - h / 3) + (j - w / 3) * (j - w / 3) < h * w / 36) v -= 0.3;
                img.at(ch, i, j) = std::min(std::max(v, 0.0), 1.0);
            }
    return img;
}

/// Unique scratch directory under the build tree's temp area; removed on
/// destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        dir_ = std::filesystem::temp_directory_path() /
               ("pnpsgs_test_" + tag + "_" + std::to_string(::getpid()));
        std::filesystem::remove_all(dir_);
        std::filesystem::create_directories(dir_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(dir_, ec);
    }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }
    std::string root() const { return dir_.string(); }

private:
    std::filesystem::path dir_;
};

}  // namespace testutil
