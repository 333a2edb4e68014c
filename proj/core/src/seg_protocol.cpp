#include "axiseg/seg_protocol.hpp"

#include <bit>
#include <cerrno>
#include <cstring>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "axiseg/errors.hpp"

namespace axiseg {

bool write_all(int fd, const void* data, std::size_t n) {
    const char* p = static_cast<const char*>(data);
    while (n > 0) {
        const ssize_t k = ::write(fd, p, n);
        if (k < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        p += k;
        n -= static_cast<std::size_t>(k);
    }
    return true;
}

bool read_all(int fd, void* data, std::size_t n) {
    char* p = static_cast<char*>(data);
    while (n > 0) {
        const ssize_t k = ::read(fd, p, n);
        if (k < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        if (k == 0) return false; // EOF mid-buffer
        p += k;
        n -= static_cast<std::size_t>(k);
    }
    return true;
}

std::optional<std::string> read_line(int fd, std::size_t max_len) {
    std::string line;
    char ch;
    for (;;) {
        const ssize_t k = ::read(fd, &ch, 1);
        if (k < 0) {
            if (errno == EINTR) continue;
            return std::nullopt;
        }
        if (k == 0) {
            if (line.empty()) return std::nullopt;
            return line; // EOF terminates a final unterminated line
        }
        if (ch == '\n') return line;
        line.push_back(ch);
        if (line.size() > max_len)
            throw FormatError("protocol line exceeds " + std::to_string(max_len) +
                              " bytes");
    }
}

std::vector<std::uint8_t> floats_to_le(const float* data, std::size_t n) {
    std::vector<std::uint8_t> out(n * 4);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t bits = std::bit_cast<std::uint32_t>(data[i]);
        out[4 * i] = static_cast<std::uint8_t>(bits & 0xff);
        out[4 * i + 1] = static_cast<std::uint8_t>((bits >> 8) & 0xff);
        out[4 * i + 2] = static_cast<std::uint8_t>((bits >> 16) & 0xff);
        out[4 * i + 3] = static_cast<std::uint8_t>((bits >> 24) & 0xff);
    }
    return out;
}

void le_to_floats(const std::uint8_t* bytes, std::size_t n, float* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t bits =
            static_cast<std::uint32_t>(bytes[4 * i]) |
            (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
            (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
            (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
        out[i] = std::bit_cast<float>(bits);
    }
}

std::string handshake_line(std::uint32_t classes) {
    nlohmann::json j = {{"proto", kSegProtocolName}, {"classes", classes}};
    return j.dump() + "\n";
}

std::string handshake_reply_line(std::uint32_t classes) {
    nlohmann::json j = {{"ok", true}, {"classes", classes}};
    return j.dump() + "\n";
}

std::string request_line(std::uint64_t id, std::uint32_t h, std::uint32_t w) {
    nlohmann::json j = {{"id", id}, {"h", h}, {"w", w}};
    return j.dump() + "\n";
}

std::string response_line(std::uint64_t id) {
    nlohmann::json j = {{"id", id}};
    return j.dump() + "\n";
}

namespace {

nlohmann::json parse_json_line(const std::string& line, const char* what) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed ") + what + " line '" + line +
                          "': " + e.what());
    }
}

} // namespace

HandshakeRequest parse_handshake(const std::string& line) {
    const nlohmann::json j = parse_json_line(line, "handshake");
    HandshakeRequest out;
    try {
        out.proto = j.at("proto").get<std::string>();
        out.classes = j.at("classes").get<std::uint32_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed handshake: ") + e.what());
    }
    return out;
}

bool parse_handshake_reply(const std::string& line, std::uint32_t expected_classes,
                           std::string* detail) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        if (detail) *detail = std::string("unparseable reply '") + line + "'";
        return false;
    }
    if (!j.contains("ok") || !j["ok"].is_boolean() || !j["ok"].get<bool>()) {
        if (detail) *detail = "backend did not acknowledge (" + line + ")";
        return false;
    }
    if (!j.contains("classes") || !j["classes"].is_number_unsigned() ||
        j["classes"].get<std::uint32_t>() != expected_classes) {
        if (detail)
            *detail = "backend class count mismatch (" + line + ", expected " +
                      std::to_string(expected_classes) + ")";
        return false;
    }
    return true;
}

RequestHeader parse_request(const std::string& line) {
    const nlohmann::json j = parse_json_line(line, "request");
    RequestHeader out;
    try {
        out.id = j.at("id").get<std::uint64_t>();
        out.h = j.at("h").get<std::uint32_t>();
        out.w = j.at("w").get<std::uint32_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed request: ") + e.what());
    }
    return out;
}

std::uint64_t parse_response_id(const std::string& line) {
    const nlohmann::json j = parse_json_line(line, "response");
    try {
        return j.at("id").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("malformed response: ") + e.what());
    }
}

} // namespace axiseg
