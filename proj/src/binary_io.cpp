#include "binary_io.hpp"

#include <fstream>
#include <iterator>

namespace rsir {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Io: return "io";
        case ErrorKind::Format: return "format";
        case ErrorKind::Dimension: return "dimension";
        case ErrorKind::InsufficientData: return "insufficient-data";
        case ErrorKind::Data: return "data";
        case ErrorKind::EmptyIndex: return "empty-index";
        case ErrorKind::Evaluation: return "evaluation";
        case ErrorKind::Construction: return "construction";
        case ErrorKind::Usage: return "usage";
    }
    return "unknown";
}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

namespace io {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path.string() + " for reading");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(ErrorKind::Io, "read error on " + path.string());
    return data;
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorKind::Io, "write error on " + path.string());
}

}  // namespace io
}  // namespace rsir
