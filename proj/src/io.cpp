#include "cwbell/io.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include <openssl/evp.h>

#include "cwbell/errors.hpp"

namespace cwbell {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot write " + path);
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot read " + path);
    return f;
}

std::string where(const std::string& path, std::size_t line) {
    return path + ":" + std::to_string(line) + ": ";
}

std::int64_t header_field(const std::string& header, const std::string& key) {
    const auto pos = header.find(" " + key + "=");
    if (pos == std::string::npos) throw FormatError("event header lacks " + key);
    return std::stoll(header.substr(pos + key.size() + 2));
}

}  // namespace

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_events(const std::string& path, const EventStream& s) {
    auto f = open_out(path);
    std::string buf = "# cwbell-events v1 quantization_ns=" + std::to_string(s.quantization_ns) +
                      " duration_ns=" + std::to_string(s.duration_ns) + "\n";
    for (const auto& e : s.events) {
        buf += std::to_string(e.t_ns);
        buf += e.channel == Channel::A ? " A\n" : " B\n";
        if (buf.size() > (1u << 20)) {
            f << buf;
            buf.clear();
        }
    }
    f << buf;
    if (!f) throw FormatError("write failed for " + path);
}

EventStream read_events(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("# cwbell-events v1", 0) != 0)
        throw FormatError(path + ": missing '# cwbell-events v1' header");
    EventStream s;
    s.quantization_ns = header_field(line, "quantization_ns");
    s.duration_ns = header_field(line, "duration_ns");
    std::size_t n = 1;
    while (std::getline(f, line)) {
        ++n;
        if (line.empty() || line[0] == '#') continue;
        char* end = nullptr;
        const long long t = std::strtoll(line.c_str(), &end, 10);
        if (end == line.c_str() || *end != ' ' || (end[1] != 'A' && end[1] != 'B') || end[2] != '\0')
            throw FormatError(where(path, n) + "expected '<t_ns> <A|B>'");
        s.events.push_back({t, end[1] == 'A' ? Channel::A : Channel::B});
    }
    if (!s.sorted()) throw FormatError(path + ": events not sorted by time and channel");
    return s;
}

void write_schedule(const std::string& path, const SettingsSchedule& s) {
    auto f = open_out(path);
    f << "# cwbell-schedule v1\n";
    for (const auto& g : s.segments)
        f << g.t_start_ns << ' ' << g.t_end_ns << ' ' << g.x << ' ' << g.y << '\n';
    if (!f) throw FormatError("write failed for " + path);
}

SettingsSchedule read_schedule(const std::string& path) {
    auto f = open_in(path);
    SettingsSchedule s;
    std::string line;
    std::size_t n = 0;
    while (std::getline(f, line)) {
        ++n;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        Segment g;
        std::string extra;
        if (!(is >> g.t_start_ns >> g.t_end_ns >> g.x >> g.y) || (is >> extra))
            throw FormatError(where(path, n) + "expected '<t_start_ns> <t_end_ns> <x> <y>'");
        s.segments.push_back(g);
    }
    try {
        s.validate();
    } catch (const std::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    return s;
}

void write_bits(const std::string& path, const BitString& b) {
    auto f = open_out(path);
    const auto bytes = b.to_bytes();
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw FormatError("write failed for " + path);
}

BitString read_bits(const std::string& path, std::uint64_t length) {
    auto f = open_in(path);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (length == 0) length = bytes.size() * 8;
    if (length > bytes.size() * 8)
        throw LengthMismatch(path + " holds " + std::to_string(bytes.size() * 8) + " bits, " +
                             std::to_string(length) + " requested");
    return BitString::from_bytes(bytes, length);
}

std::string sha256_file(const std::string& path) {
    auto f = open_in(path);
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    std::vector<char> buf(1 << 16);
    while (f) {
        f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(f.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

void Manifest::set(const std::string& key, const std::string& value) {
    if (key.empty() || key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos)
        throw FormatError("manifest keys and values must be single-line, keys without '='");
    for (auto& kv : kv_)
        if (kv.first == key) {
            kv.second = value;
            return;
        }
    kv_.emplace_back(key, value);
}

const std::string* Manifest::get(const std::string& key) const {
    for (const auto& kv : kv_)
        if (kv.first == key) return &kv.second;
    return nullptr;
}

std::string Manifest::text() const {
    std::string s;
    for (const auto& [k, v] : kv_) s += k + "=" + v + "\n";
    return s;
}

void Manifest::write(const std::string& path) const {
    auto f = open_out(path);
    f << text();
    if (!f) throw FormatError("write failed for " + path);
}

Manifest Manifest::parse(const std::string& text) {
    Manifest m;
    std::istringstream is(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw FormatError("line " + std::to_string(n) + ": expected key=value");
        m.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return m;
}

Manifest Manifest::read(const std::string& path) {
    auto f = open_in(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

}  // namespace cwbell
