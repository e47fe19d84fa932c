#include "pnpsgs/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "pnpsgs/errors.hpp"

namespace pnpsgs {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

}  // namespace

Image read_png(const std::string& path) {
    FilePtr fp(fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("png read: cannot open " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png read: init failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png read: init failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("png read: corrupt file " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const png_byte color_type = png_get_color_type(png, info);
    const png_byte bit_depth = png_get_bit_depth(png, info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("png read: unsupported channel count " + std::to_string(channels));
    }

    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<png_byte> buffer(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 i = 0; i < height; ++i) rows[i] = buffer.data() + i * rowbytes;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(static_cast<int>(height), static_cast<int>(width), channels);
    const double denom = depth == 16 ? 65535.0 : 255.0;
    for (png_uint_32 i = 0; i < height; ++i) {
        for (png_uint_32 j = 0; j < width; ++j) {
            for (int c = 0; c < channels; ++c) {
                double v;
                if (depth == 16) {
                    const std::size_t off = (j * channels + c) * 2;
                    v = static_cast<double>((rows[i][off] << 8) | rows[i][off + 1]);
                } else {
                    v = static_cast<double>(rows[i][j * channels + c]);
                }
                img.at(c, static_cast<int>(i), static_cast<int>(j)) = v / denom;
            }
        }
    }
    return img;
}

void write_png(const std::string& path, const Image& img) {
    if (img.channels() != 1 && img.channels() != 3)
        throw IoError("png write: image must have 1 or 3 channels");
    if (img.height() < 1 || img.width() < 1) throw IoError("png write: empty image");

    FilePtr fp(fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("png write: cannot open " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png write: init failure");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png write: init failure");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png write: failure writing " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), 8,
                 img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<png_byte> row(static_cast<std::size_t>(img.width()) * img.channels());
    for (int i = 0; i < img.height(); ++i) {
        for (int j = 0; j < img.width(); ++j)
            for (int c = 0; c < img.channels(); ++c)
                row[static_cast<std::size_t>(j) * img.channels() + c] = static_cast<png_byte>(
                    std::lround(std::clamp(img.at(c, i, j), 0.0, 1.0) * 255.0));
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace pnpsgs
