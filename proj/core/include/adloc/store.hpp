#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adloc/job.hpp"
#include "adloc/raster.hpp"

namespace adloc::pipeline {

/// One directory per job under the store root:
///   <root>/<id>/manifest.json, original.png, mask.png, background.png, localized.png
/// Every file is written to "<file>.tmp" and renamed into place, so readers
/// see either the old or the new version. The manifest is the commit point:
/// a file it does not reference does not exist as far as the job goes.
class JobStore {
public:
    /// Called with a point name at every step of a durable write. Tests throw
    /// from it to simulate a crash at that step.
    using FaultHook = std::function<void(std::string_view point)>;

    struct Recovery {
        std::size_t temp_files = 0;
        std::size_t orphan_artifacts = 0;
        std::size_t incomplete_jobs = 0;
    };

    /// Creates the root if needed and runs recover(). Throws
    /// Error(StoreUnreadable) if the root is not a usable directory.
    explicit JobStore(std::filesystem::path root);

    const std::filesystem::path& root() const noexcept { return root_; }

    /// Removes leftovers of interrupted writes: temp files, artifacts the
    /// manifest does not reference and job directories without a manifest.
    /// Jobs locked by someone else are left alone.
    Recovery recover();

    std::string new_id() const;
    bool exists(std::string_view id) const;
    /// Throws Error(NotFound) or Error(StoreUnreadable) for a corrupt manifest.
    LocalizationJob load(std::string_view id) const;
    /// All readable jobs, oldest first.
    std::vector<LocalizationJob> list() const;

    std::filesystem::path job_dir(std::string_view id) const;
    /// Throws Error(NotFound) unless the manifest references the artifact.
    std::filesystem::path artifact_path(const LocalizationJob& job, std::string_view artifact) const;
    Raster read_artifact(const LocalizationJob& job, std::string_view artifact) const;
    std::vector<std::uint8_t> read_artifact_bytes(const LocalizationJob& job, std::string_view artifact) const;

    /// Creates the job directory.
    void create_dir(std::string_view id);
    /// Durably writes "<artifact>.png" and returns its file name. Committed
    /// artifacts are immutable: throws Error(Conflict) if `job` already
    /// references it.
    std::string put_artifact(const LocalizationJob& job, std::string_view artifact, const Raster& img);
    /// Validates the job, bumps its version and durably replaces the manifest.
    void commit(LocalizationJob& job);

    /// Exclusive per-job lock (flock on <dir>/.lock); serializes transitions
    /// across threads and processes.
    class Lock {
    public:
        Lock() = default;
        explicit Lock(const std::filesystem::path& lock_file);
        Lock(Lock&& other) noexcept;
        Lock& operator=(Lock&& other) noexcept;
        Lock(const Lock&) = delete;
        Lock& operator=(const Lock&) = delete;
        ~Lock();

    private:
        int fd_ = -1;
    };
    Lock lock(std::string_view id) const;

    void set_fault_hook(FaultHook hook) { hook_ = std::move(hook); }

private:
    void write_atomic(const std::filesystem::path& target, std::span<const std::uint8_t> bytes,
                      std::string_view label);
    void fault(std::string_view label, std::string_view step);

    std::filesystem::path root_;
    FaultHook hook_;
};

}  // namespace adloc::pipeline
