#include "fanbeam/npy.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fanbeam/error.hpp"

namespace fanbeam::npy {

namespace {

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::Format, "npy: " + msg); }

/// Extracts the value text following 'key': in the header dict.
std::string_view dict_value(std::string_view header, std::string_view key) {
    const std::string quoted = "'" + std::string(key) + "'";
    auto pos = header.find(quoted);
    if (pos == std::string_view::npos) bad("header lacks " + quoted);
    pos = header.find(':', pos + quoted.size());
    if (pos == std::string_view::npos) bad("malformed header");
    ++pos;
    while (pos < header.size() && header[pos] == ' ') ++pos;
    std::size_t end = pos;
    if (header[pos] == '(') {
        end = header.find(')', pos);
        if (end == std::string_view::npos) bad("unterminated shape tuple");
        ++end;
    } else if (header[pos] == '\'') {
        end = header.find('\'', pos + 1);
        if (end == std::string_view::npos) bad("unterminated string");
        ++end;
    } else {
        while (end < header.size() && header[end] != ',' && header[end] != '}') ++end;
    }
    return header.substr(pos, end - pos);
}

std::vector<std::size_t> parse_shape(std::string_view tuple) {
    std::vector<std::size_t> shape;
    std::size_t i = 1; // skip '('
    while (i < tuple.size()) {
        while (i < tuple.size() && (tuple[i] == ' ' || tuple[i] == ',')) ++i;
        if (i >= tuple.size() || tuple[i] == ')') break;
        std::size_t v = 0;
        bool any = false;
        while (i < tuple.size() && tuple[i] >= '0' && tuple[i] <= '9') {
            v = v * 10 + static_cast<std::size_t>(tuple[i] - '0');
            ++i;
            any = true;
        }
        if (!any) bad("bad shape entry in " + std::string(tuple));
        shape.push_back(v);
    }
    return shape;
}

} // namespace

std::string encode(std::span<const double> data, std::span<const std::size_t> shape) {
    std::size_t count = 1;
    for (auto s : shape) count *= s;
    require(count == data.size(), ErrorKind::ShapeMismatch, "npy: data size does not match shape");

    std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': (";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        dict += std::to_string(shape[i]);
        if (shape.size() == 1 || i + 1 < shape.size()) dict += ",";
        if (i + 1 < shape.size()) dict += " ";
    }
    dict += "), }";
    // Pad so that magic + version + length + header is a multiple of 64.
    const std::size_t prefix = kMagicLen + 2 + 2;
    std::size_t total = prefix + dict.size() + 1;
    const std::size_t padded = (total + 63) / 64 * 64;
    dict.append(padded - total, ' ');
    dict += '\n';
    require(dict.size() <= 0xffff, ErrorKind::Format, "npy: header too long");

    std::string out;
    out.reserve(prefix + dict.size() + 4 * data.size());
    out.append(kMagic, kMagicLen);
    out += '\x01';
    out += '\x00';
    const auto hlen = static_cast<std::uint16_t>(dict.size());
    out += static_cast<char>(hlen & 0xff);
    out += static_cast<char>(hlen >> 8);
    out += dict;
    for (double v : data) {
        const float f = static_cast<float>(v);
        char buf[4];
        std::memcpy(buf, &f, 4);
        out.append(buf, 4);
    }
    return out;
}

Array decode(std::string_view bytes) {
    if (bytes.size() < kMagicLen + 4 || bytes.substr(0, kMagicLen) != std::string_view(kMagic, kMagicLen))
        bad("missing magic string");
    const auto major = static_cast<unsigned char>(bytes[kMagicLen]);
    std::size_t header_len = 0;
    std::size_t offset = 0;
    if (major == 1) {
        header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
        offset = 10;
    } else if (major == 2 || major == 3) {
        if (bytes.size() < 12) bad("truncated header");
        for (int i = 3; i >= 0; --i) header_len = (header_len << 8) | static_cast<unsigned char>(bytes[8 + i]);
        offset = 12;
    } else {
        bad("unsupported version " + std::to_string(major));
    }
    if (bytes.size() < offset + header_len) bad("truncated header");
    const std::string_view header = bytes.substr(offset, header_len);

    const std::string_view descr = dict_value(header, "descr");
    std::size_t item = 0;
    if (descr == "'<f4'") item = 4;
    else if (descr == "'<f8'") item = 8;
    else bad("unsupported dtype " + std::string(descr));
    if (dict_value(header, "fortran_order") != "False") bad("fortran_order arrays are not supported");

    Array arr;
    arr.shape = parse_shape(dict_value(header, "shape"));
    std::size_t count = 1;
    for (auto s : arr.shape) count *= s;
    const std::string_view payload = bytes.substr(offset + header_len);
    if (payload.size() != count * item)
        bad("payload has " + std::to_string(payload.size()) + " bytes, expected " +
            std::to_string(count * item));

    arr.data.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (item == 4) {
            float f;
            std::memcpy(&f, payload.data() + 4 * i, 4);
            arr.data[i] = f;
        } else {
            double d;
            std::memcpy(&d, payload.data() + 8 * i, 8);
            arr.data[i] = d;
        }
    }
    return arr;
}

Array read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    require(!in.bad(), ErrorKind::Io, "read failed for " + path.string());
    try {
        return decode(bytes);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

void write(const std::filesystem::path& path, std::span<const double> data,
           std::span<const std::size_t> shape) {
    const std::string bytes = encode(data, shape);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    require(static_cast<bool>(out), ErrorKind::Io, "write failed for " + path.string());
}

namespace {

template <class Tag>
Grid2D<Tag> read_grid(const std::filesystem::path& path, const char* what) {
    Array arr = read(path);
    require(arr.shape.size() == 2, ErrorKind::ShapeMismatch,
            path.string() + ": " + what + " must be a 2-D array");
    return Grid2D<Tag>(arr.shape[0], arr.shape[1], std::move(arr.data));
}

} // namespace

Image read_image(const std::filesystem::path& path) {
    Image img = read_grid<ImageTag>(path, "image");
    require(img.rows() == img.cols(), ErrorKind::ShapeMismatch, path.string() + ": image must be square");
    return img;
}

Sinogram read_sinogram(const std::filesystem::path& path) { return read_grid<SinogramTag>(path, "sinogram"); }

} // namespace fanbeam::npy
