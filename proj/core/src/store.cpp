#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <utility>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "adloc/error.hpp"
#include "adloc/store.hpp"

namespace fs = std::filesystem;

namespace adloc::pipeline {
namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kLockFile = ".lock";
constexpr const char* kTempSuffix = ".tmp";

[[noreturn]] void io_error(const std::string& what) {
    throw Error(ErrorCode::IoError, what + ": " + std::strerror(errno));
}

void fsync_dir(const fs::path& dir) {
    const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

bool valid_id(std::string_view id) {
    return !id.empty() && id.size() <= 64 && std::all_of(id.begin(), id.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    });
}

std::vector<std::uint8_t> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string created_at(const LocalizationJob& job) {
    return job.timestamps.empty() ? std::string() : job.timestamps.front().at;
}

}  // namespace

JobStore::Lock::Lock(const fs::path& lock_file) {
    fd_ = ::open(lock_file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) io_error("cannot open lock " + lock_file.string());
    while (::flock(fd_, LOCK_EX) != 0) {
        if (errno != EINTR) {
            ::close(fd_);
            fd_ = -1;
            io_error("cannot lock " + lock_file.string());
        }
    }
}

JobStore::Lock::Lock(Lock&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}

JobStore::Lock& JobStore::Lock::operator=(Lock&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

JobStore::Lock::~Lock() {
    if (fd_ >= 0) ::close(fd_);  // releases the flock
}

JobStore::JobStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    if (!fs::exists(root_, ec)) fs::create_directories(root_, ec);
    if (ec || !fs::is_directory(root_, ec)) {
        throw Error(ErrorCode::StoreUnreadable, "store path " + root_.string() + " is not a usable directory");
    }
    if (::access(root_.c_str(), R_OK | W_OK | X_OK) != 0) {
        throw Error(ErrorCode::StoreUnreadable, "store path " + root_.string() + " is not readable and writable");
    }
    recover();
}

JobStore::Recovery JobStore::recover() {
    Recovery r;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root_, ec)) {
        if (!entry.is_directory() || !valid_id(entry.path().filename().string())) continue;
        const fs::path dir = entry.path();

        const int fd = ::open((dir / kLockFile).c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
        if (fd < 0) continue;
        if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd);
            continue;
        }

        std::vector<fs::path> files;
        for (const auto& f : fs::directory_iterator(dir, ec)) files.push_back(f.path());
        for (const auto& f : files) {
            if (f.filename().string().ends_with(kTempSuffix)) {
                fs::remove(f, ec);
                ++r.temp_files;
            }
        }
        if (!fs::exists(dir / kManifest)) {
            ::close(fd);
            fs::remove_all(dir, ec);
            ++r.incomplete_jobs;
            continue;
        }
        try {
            const auto job = load(dir.filename().string());
            std::set<std::string> referenced;
            for (const auto& [name, file] : job.artifact_paths) referenced.insert(file);
            for (const auto& f : files) {
                if (f.extension() == ".png" && !referenced.contains(f.filename().string())) {
                    fs::remove(f, ec);
                    ++r.orphan_artifacts;
                }
            }
        } catch (const Error&) {
            // A corrupt manifest is reported by load(); nothing to repair here.
        }
        ::close(fd);
    }
    return r;
}

std::string JobStore::new_id() const {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    static constexpr char kHex[] = "0123456789abcdef";
    for (;;) {
        std::uint64_t v = rng();
        std::string id(12, '0');
        for (char& c : id) {
            c = kHex[v & 0xF];
            v >>= 4;
        }
        if (!fs::exists(root_ / id)) return id;
    }
}

fs::path JobStore::job_dir(std::string_view id) const {
    if (!valid_id(id)) throw Error(ErrorCode::NotFound, "invalid job id '" + std::string(id) + "'");
    return root_ / std::string(id);
}

bool JobStore::exists(std::string_view id) const {
    return valid_id(id) && fs::exists(job_dir(id) / kManifest);
}

LocalizationJob JobStore::load(std::string_view id) const {
    const fs::path manifest = job_dir(id) / kManifest;
    if (!fs::exists(manifest)) throw Error(ErrorCode::NotFound, "no job '" + std::string(id) + "'");
    const auto bytes = slurp(manifest);
    auto doc = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::StoreUnreadable, "manifest of job " + std::string(id) + " is not JSON");
    try {
        auto job = doc.get<LocalizationJob>();
        validate(job);
        if (job.id != id) throw Error(ErrorCode::InvalidArgument, "manifest id does not match its directory");
        return job;
    } catch (const Error& e) {
        throw Error(ErrorCode::StoreUnreadable, "manifest of job " + std::string(id) + ": " + e.what());
    }
}

std::vector<LocalizationJob> JobStore::list() const {
    std::vector<LocalizationJob> jobs;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root_, ec)) {
        const std::string name = entry.path().filename().string();
        if (!entry.is_directory() || !valid_id(name)) continue;
        try {
            jobs.push_back(load(name));
        } catch (const Error&) {
        }
    }
    std::sort(jobs.begin(), jobs.end(), [](const auto& a, const auto& b) {
        return std::pair(created_at(a), a.id) < std::pair(created_at(b), b.id);
    });
    return jobs;
}

fs::path JobStore::artifact_path(const LocalizationJob& job, std::string_view artifact) const {
    const auto it = job.artifact_paths.find(std::string(artifact));
    if (it == job.artifact_paths.end()) {
        throw Error(ErrorCode::NotFound, "job " + job.id + " has no " + std::string(artifact) + " artifact");
    }
    return job_dir(job.id) / it->second;
}

Raster JobStore::read_artifact(const LocalizationJob& job, std::string_view artifact) const {
    return read_image(artifact_path(job, artifact));
}

std::vector<std::uint8_t> JobStore::read_artifact_bytes(const LocalizationJob& job, std::string_view artifact) const {
    return slurp(artifact_path(job, artifact));
}

void JobStore::create_dir(std::string_view id) {
    const fs::path dir = job_dir(id);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    fsync_dir(root_);
}

std::string JobStore::put_artifact(const LocalizationJob& job, std::string_view artifact, const Raster& img) {
    artifact_stage(artifact);
    if (job.artifact_paths.contains(std::string(artifact))) {
        throw Error(ErrorCode::Conflict, "artifact " + std::string(artifact) + " of job " + job.id + " is immutable");
    }
    const std::string file = std::string(artifact) + ".png";
    write_atomic(job_dir(job.id) / file, encode_png(img), artifact);
    return file;
}

void JobStore::commit(LocalizationJob& job) {
    validate(job);
    LocalizationJob next = job;
    ++next.version;
    const std::string text = nlohmann::json(next).dump(2) + "\n";
    write_atomic(job_dir(job.id) / kManifest, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()},
                 "manifest");
    job = std::move(next);
}

JobStore::Lock JobStore::lock(std::string_view id) const {
    const fs::path dir = job_dir(id);
    if (!fs::is_directory(dir)) throw Error(ErrorCode::NotFound, "no job '" + std::string(id) + "'");
    return Lock(dir / kLockFile);
}

void JobStore::fault(std::string_view label, std::string_view step) {
    if (hook_) hook_(std::string(label) + ":" + std::string(step));
}

void JobStore::write_atomic(const fs::path& target, std::span<const std::uint8_t> bytes, std::string_view label) {
    const fs::path tmp = target.string() + kTempSuffix;
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) io_error("cannot create " + tmp.string());
    struct Closer {
        int fd;
        ~Closer() { ::close(fd); }
    } closer{fd};

    auto write_all = [&](std::span<const std::uint8_t> chunk) {
        while (!chunk.empty()) {
            const ssize_t n = ::write(fd, chunk.data(), chunk.size());
            if (n < 0) {
                if (errno == EINTR) continue;
                io_error("cannot write " + tmp.string());
            }
            chunk = chunk.subspan(static_cast<std::size_t>(n));
        }
    };
    const std::size_t half = bytes.size() / 2;
    write_all(bytes.first(half));
    fault(label, "partial");
    write_all(bytes.subspan(half));
    if (::fsync(fd) != 0) io_error("cannot sync " + tmp.string());
    fault(label, "written");
    if (::rename(tmp.c_str(), target.c_str()) != 0) io_error("cannot rename " + tmp.string());
    fault(label, "renamed");
    fsync_dir(target.parent_path());
    fault(label, "synced");
}

}  // namespace adloc::pipeline
