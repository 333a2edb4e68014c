#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace axiseg {

// Wire protocol "axiseg-seg/1" between the pipeline and a segmenter process,
// over the child's standard streams:
//   handshake  parent: {"proto":"axiseg-seg/1","classes":C}\n
//              child:  {"ok":true,"classes":C}\n
//   request    {"id":n,"h":H,"w":W}\n + H*W float32 LE, row-major
//   response   {"id":n}\n            + C*H*W float32 LE, channel-major
//   shutdown   parent closes the child's stdin; child exits 0.
inline constexpr const char* kSegProtocolName = "axiseg-seg/1";

// POSIX fd helpers; short reads/writes are retried, EOF mid-buffer fails.
bool write_all(int fd, const void* data, std::size_t n);
bool read_all(int fd, void* data, std::size_t n);
// One newline-terminated line (newline stripped); nullopt on clean EOF
// before any byte.
std::optional<std::string> read_line(int fd, std::size_t max_len = 4096);

// Explicit little-endian float32 framing.
std::vector<std::uint8_t> floats_to_le(const float* data, std::size_t n);
void le_to_floats(const std::uint8_t* bytes, std::size_t n, float* out);

std::string handshake_line(std::uint32_t classes);
std::string handshake_reply_line(std::uint32_t classes);
std::string request_line(std::uint64_t id, std::uint32_t h, std::uint32_t w);
std::string response_line(std::uint64_t id);

struct HandshakeRequest {
    std::string proto;
    std::uint32_t classes = 0;
};
struct RequestHeader {
    std::uint64_t id = 0;
    std::uint32_t h = 0;
    std::uint32_t w = 0;
};

// Parsers throw FormatError on malformed lines.
HandshakeRequest parse_handshake(const std::string& line);
bool parse_handshake_reply(const std::string& line, std::uint32_t expected_classes,
                           std::string* detail);
RequestHeader parse_request(const std::string& line);
std::uint64_t parse_response_id(const std::string& line);

} // namespace axiseg
