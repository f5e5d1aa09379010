#include "proxopt/simulate.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace proxopt {

namespace {

constexpr char kMagic[8] = {'P', 'R', 'O', 'X', 'I', 'M', 'G', '1'};

template <class T>
void put_le(std::ostream& os, T v)
{
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(std::istream& is)
{
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T)))
        throw InvalidArgument("proximg: truncated stream");
    if constexpr (std::endian::native == std::endian::big)
        for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

std::uint64_t element_count(const std::vector<std::uint32_t>& dims)
{
    std::uint64_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

} // namespace

void write_proximg(std::ostream& os, const ImageData& img)
{
    require(!img.dims.empty(), "proximg: rank must be >= 1");
    require(element_count(img.dims) == static_cast<std::uint64_t>(img.values.size()),
            "proximg: dims do not match the payload");
    os.write(kMagic, sizeof(kMagic));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(img.dims.size()));
    for (auto d : img.dims) put_le<std::uint32_t>(os, d);
    for (Index i = 0; i < img.values.size(); ++i) put_le<double>(os, img.values[i]);
    if (!os) throw Error("proximg: write failed");
}

ImageData read_proximg(std::istream& is)
{
    char magic[8];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw InvalidArgument("proximg: bad magic");
    ImageData img;
    const auto rank = get_le<std::uint32_t>(is);
    require(rank >= 1 && rank <= 16, "proximg: unsupported rank");
    for (std::uint32_t k = 0; k < rank; ++k) img.dims.push_back(get_le<std::uint32_t>(is));
    const std::uint64_t n = element_count(img.dims);
    require(n <= (std::uint64_t(1) << 32), "proximg: payload too large");
    img.values.resize(static_cast<Index>(n));
    for (Index i = 0; i < img.values.size(); ++i) img.values[i] = get_le<double>(is);
    if (is.peek() != std::char_traits<char>::eof())
        throw InvalidArgument("proximg: trailing bytes after payload");
    return img;
}

void save_proximg(const std::string& path, const ImageData& img)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("proximg: cannot open " + path);
    write_proximg(os, img);
}

ImageData load_proximg(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgument("proximg: cannot open " + path);
    return read_proximg(is);
}

std::string proximg_bytes(const ImageData& img)
{
    std::ostringstream os(std::ios::binary);
    write_proximg(os, img);
    return os.str();
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 15]);
    }
    return out;
}

} // namespace proxopt
