// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include "luxprobe/image_io.h"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

namespace luxprobe {
namespace {

[[noreturn]] void io_error(const std::filesystem::path& path, const std::string& what) {
    fail(ErrorCode::Io, path.string() + ": " + what);
}

[[noreturn]] void format_error(const std::filesystem::path& path, const std::string& what) {
    fail(ErrorCode::Format, path.string() + ": " + what);
}

std::string read_token(std::istream& in) {
    std::string tok;
    char ch = 0;
    while (in.get(ch)) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(ch);
    }
    return tok;
}

float byteswap_float(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    bits = ((bits & 0xff) << 24) | ((bits & 0xff00) << 8) | ((bits >> 8) & 0xff00) | (bits >> 24);
    std::memcpy(&v, &bits, sizeof bits);
    return v;
}

std::string lowercase_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

std::uint8_t to_byte(float v) {
    const double clipped = std::clamp(static_cast<double>(v), 0.0, 1.0);
    return static_cast<std::uint8_t>(std::round(clipped * 255.0));
}

// Matches quantize8: k / 255 evaluated in double, then rounded once to float.
float byte_to_unit(std::uint8_t k) { return static_cast<float>(k / 255.0); }

}  // namespace

Image read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_error(path, "cannot open for reading");

    const std::string magic = read_token(in);
    int channels = 0;
    if (magic == "PF") {
        channels = 3;
    } else if (magic == "Pf") {
        channels = 1;
    } else {
        format_error(path, "not a PFM file");
    }
    int width = 0, height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(read_token(in));
        height = std::stoi(read_token(in));
        scale = std::stod(read_token(in));
    } catch (const std::exception&) {
        format_error(path, "malformed PFM header");
    }
    if (width <= 0 || height <= 0 || scale == 0.0) format_error(path, "invalid PFM dimensions or scale");
    const bool little = scale < 0.0;
    const bool swap = little != (std::endian::native == std::endian::little);

    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    std::vector<float> data(count);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * sizeof(float)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(float)) format_error(path, "truncated PFM data");

    Image img(width, height);
    for (int r = 0; r < height; ++r) {
        const int file_row = height - 1 - r;
        for (int c = 0; c < width; ++c) {
            const std::size_t base = (static_cast<std::size_t>(file_row) * width + c) * channels;
            Rgb& p = img.at(c, r);
            for (std::size_t k = 0; k < 3; ++k) {
                float v = data[base + (channels == 3 ? k : 0)];
                p[k] = swap ? byteswap_float(v) : v;
            }
        }
    }
    return img;
}

void write_pfm(const std::filesystem::path& path, const Image& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) io_error(path, "cannot open for writing");
    out << "PF\n" << image.width() << ' ' << image.height() << "\n-1.0\n";
    std::vector<float> row(static_cast<std::size_t>(image.width()) * 3);
    for (int r = image.height() - 1; r >= 0; --r) {
        for (int c = 0; c < image.width(); ++c) {
            const Rgb& p = image.at(c, r);
            for (std::size_t k = 0; k < 3; ++k) {
                float v = p[k];
                if constexpr (std::endian::native != std::endian::little) v = byteswap_float(v);
                row[static_cast<std::size_t>(c) * 3 + k] = v;
            }
        }
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) io_error(path, "write failed");
}

Image read_rgbe(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) io_error(path, "cannot open for reading");

    std::string line;
    std::getline(in, line);
    if (line.rfind("#?", 0) != 0) format_error(path, "missing Radiance signature");
    bool rgbe = true;
    while (std::getline(in, line) && !line.empty()) {
        if (line.rfind("FORMAT=", 0) == 0) rgbe = line == "FORMAT=32-bit_rle_rgbe";
    }
    if (!rgbe) format_error(path, "unsupported Radiance pixel format");

    std::getline(in, line);
    std::istringstream res(line);
    std::string ya, xa;
    int height = 0, width = 0;
    res >> ya >> height >> xa >> width;
    if (ya != "-Y" || xa != "+X" || width <= 0 || height <= 0) {
        format_error(path, "unsupported resolution line '" + line + "'");
    }

    Image img(width, height);
    std::vector<std::uint8_t> scan(static_cast<std::size_t>(width) * 4);
    auto get = [&]() {
        const int ch = in.get();
        if (ch == EOF) format_error(path, "truncated RGBE data");
        return static_cast<std::uint8_t>(ch);
    };

    for (int r = 0; r < height; ++r) {
        const std::uint8_t b0 = get(), b1 = get(), b2 = get(), b3 = get();
        const bool rle = width >= 8 && width < 32768 && b0 == 2 && b1 == 2 && (b2 & 0x80) == 0;
        if (rle) {
            if (((b2 << 8) | b3) != width) format_error(path, "RLE scanline width mismatch");
            for (int k = 0; k < 4; ++k) {
                int c = 0;
                while (c < width) {
                    std::uint8_t count = get();
                    if (count > 128) {
                        count -= 128;
                        const std::uint8_t v = get();
                        if (c + count > width) format_error(path, "RLE run overflows scanline");
                        for (int i = 0; i < count; ++i) scan[static_cast<std::size_t>(c++) * 4 + k] = v;
                    } else {
                        if (count == 0 || c + count > width) format_error(path, "bad RLE literal run");
                        for (int i = 0; i < count; ++i) scan[static_cast<std::size_t>(c++) * 4 + k] = get();
                    }
                }
            }
        } else {
            scan[0] = b0;
            scan[1] = b1;
            scan[2] = b2;
            scan[3] = b3;
            for (std::size_t i = 4; i < scan.size(); ++i) scan[i] = get();
        }
        for (int c = 0; c < width; ++c) {
            const std::uint8_t* px = &scan[static_cast<std::size_t>(c) * 4];
            Rgb& p = img.at(c, r);
            if (px[3] == 0) {
                p = {};
                continue;
            }
            const float f = std::ldexp(1.0f, static_cast<int>(px[3]) - (128 + 8));
            p = {(px[0] + 0.5f) * f, (px[1] + 0.5f) * f, (px[2] + 0.5f) * f};
        }
    }
    return img;
}

Image read_hdr_image(const std::filesystem::path& path) {
    const std::string ext = lowercase_extension(path);
    if (ext == ".pfm") return read_pfm(path);
    if (ext == ".hdr" || ext == ".rgbe" || ext == ".pic") return read_rgbe(path);
    format_error(path, "unrecognized HDR extension '" + ext + "' (expected .pfm or .hdr)");
}

EnvironmentMap read_environment_map(const std::filesystem::path& path) {
    try {
        return EnvironmentMap(read_hdr_image(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io || e.code() == ErrorCode::Format) throw;
        fail(ErrorCode::Format, path.string() + ": " + e.what());
    }
}

namespace {

struct PngWriteDeleter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriteDeleter() { png_destroy_write_struct(&png, &info); }
};

struct PngReadDeleter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReadDeleter() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};

constexpr char kCurveKey[] = "luxprobe:tonecurve";

}  // namespace

void write_png(const std::filesystem::path& path, const Image& image, const std::string& curve) {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.string().c_str(), "wb"));
    if (!file) io_error(path, "cannot open for writing");

    PngWriteDeleter guard;
    guard.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!guard.png) io_error(path, "png_create_write_struct failed");
    guard.info = png_create_info_struct(guard.png);
    if (!guard.info) io_error(path, "png_create_info_struct failed");

    std::vector<std::uint8_t> bytes(image.size() * 3);
    for (std::size_t i = 0; i < image.size(); ++i) {
        const Rgb& p = image.pixels()[i];
        bytes[i * 3 + 0] = to_byte(p.r);
        bytes[i * 3 + 1] = to_byte(p.g);
        bytes[i * 3 + 2] = to_byte(p.b);
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
    for (int r = 0; r < image.height(); ++r) rows[r] = bytes.data() + static_cast<std::size_t>(r) * image.width() * 3;

    std::string key = kCurveKey;
    std::string value = curve;
    png_text text{};
    text.compression = PNG_TEXT_COMPRESSION_NONE;
    text.key = key.data();
    text.text = value.data();
    text.text_length = value.size();

    if (setjmp(png_jmpbuf(guard.png))) io_error(path, "libpng write error");
    png_init_io(guard.png, file.get());
    png_set_compression_level(guard.png, 6);
    png_set_IHDR(guard.png, guard.info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_sRGB(guard.png, guard.info, PNG_sRGB_INTENT_PERCEPTUAL);
    png_set_text(guard.png, guard.info, &text, 1);
    png_write_info(guard.png, guard.info);
    png_write_image(guard.png, rows.data());
    png_write_end(guard.png, nullptr);
}

Png read_png(const std::filesystem::path& path) {
    std::unique_ptr<std::FILE, FileCloser> file(std::fopen(path.string().c_str(), "rb"));
    if (!file) io_error(path, "cannot open for reading");
    std::uint8_t sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) format_error(path, "not a PNG file");

    PngReadDeleter guard;
    guard.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!guard.png) io_error(path, "png_create_read_struct failed");
    guard.info = png_create_info_struct(guard.png);
    if (!guard.info) io_error(path, "png_create_info_struct failed");
    if (setjmp(png_jmpbuf(guard.png))) format_error(path, "libpng read error");

    png_init_io(guard.png, file.get());
    png_set_sig_bytes(guard.png, 8);
    png_read_info(guard.png, guard.info);

    const png_byte color = png_get_color_type(guard.png, guard.info);
    const png_byte depth = png_get_bit_depth(guard.png, guard.info);
    if (depth == 16) png_set_strip_16(guard.png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(guard.png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(guard.png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(guard.png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(guard.png);
    png_read_update_info(guard.png, guard.info);

    const int width = static_cast<int>(png_get_image_width(guard.png, guard.info));
    const int height = static_cast<int>(png_get_image_height(guard.png, guard.info));
    if (png_get_rowbytes(guard.png, guard.info) != static_cast<std::size_t>(width) * 3) {
        format_error(path, "unsupported PNG layout");
    }
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(width) * height * 3);
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int r = 0; r < height; ++r) rows[r] = bytes.data() + static_cast<std::size_t>(r) * width * 3;
    png_read_image(guard.png, rows.data());
    png_read_end(guard.png, guard.info);

    Png result{Image(width, height), std::nullopt};
    for (std::size_t i = 0; i < result.image.size(); ++i) {
        result.image.pixels()[i] = {byte_to_unit(bytes[i * 3]), byte_to_unit(bytes[i * 3 + 1]), byte_to_unit(bytes[i * 3 + 2])};
    }
    png_textp texts = nullptr;
    int num_text = 0;
    png_get_text(guard.png, guard.info, &texts, &num_text);
    for (int i = 0; i < num_text; ++i) {
        if (std::strcmp(texts[i].key, kCurveKey) == 0) result.curve = std::string(texts[i].text, texts[i].text_length);
    }
    return result;
}

}  // namespace luxprobe
