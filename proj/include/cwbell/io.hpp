#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cwbell/bitstring.hpp"
#include "cwbell/event_simulator.hpp"

namespace cwbell {

// "# cwbell-events v1 quantization_ns=<q> duration_ns=<d>" then "<t_ns> <A|B>"
void write_events(const std::string& path, const EventStream& s);
EventStream read_events(const std::string& path);

// "<t_start_ns> <t_end_ns> <x> <y>" per line; '#' starts a comment
void write_schedule(const std::string& path, const SettingsSchedule& s);
SettingsSchedule read_schedule(const std::string& path);

// Raw bytes, most significant bit first, last byte zero-padded.
void write_bits(const std::string& path, const BitString& b);
// length = 0 reads every bit of the file
BitString read_bits(const std::string& path, std::uint64_t length = 0);

std::string sha256_file(const std::string& path);

// 12 significant digits
std::string fmt(double v);

// Ordered key=value text. Lines starting with '#' and blank lines are skipped.
class Manifest {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value) { set(key, fmt(value)); }
    void set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
    void set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }
    void set(const std::string& key, int value) { set(key, std::to_string(value)); }
    const std::string* get(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return kv_; }

    std::string text() const;
    void write(const std::string& path) const;
    static Manifest parse(const std::string& text);
    static Manifest read(const std::string& path);

private:
    std::vector<std::pair<std::string, std::string>> kv_;
};

}  // namespace cwbell
