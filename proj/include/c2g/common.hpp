#pragma once
/**
 * @file common.hpp
 * @brief Shared error type, deterministic RNG helpers, little-endian binary
 *        I/O and a small deterministic parallel-for.
 */

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace c2g
{
    inline constexpr double kPi = std::numbers::pi;
    inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
    inline constexpr double kInf = std::numeric_limits<double>::infinity();

    enum class ErrorCode
    {
        InvalidArgument = 1,
        Infeasible = 2,
        Io = 3,
        Collision = 4,
        Partial = 5,
        Internal = 6,
    };

    /// Exception carrying an error category that the C API maps to a status code.
    class Error : public std::runtime_error
    {
      public:
        Error (ErrorCode code, const std::string &what) : std::runtime_error (what), code_ (code) {}
        ErrorCode code () const noexcept { return code_; }

      private:
        ErrorCode code_;
    };

    [[noreturn]] void fail (ErrorCode code, const std::string &what);
    inline void require (bool cond, const std::string &what)
    {
        if (!cond)
            fail (ErrorCode::InvalidArgument, what);
    }

    /**
     * @brief std::mt19937_64 with fixed uniform/normal mappings.
     *
     * The engine's output sequence is standardized but the std distributions
     * are not, so shards and checksums use these mappings instead.
     */
    class Rng
    {
      public:
        explicit Rng (std::uint64_t seed) : engine_ (seed) {}

        std::uint64_t next () { return engine_ (); }
        /// Uniform in [0, 1) with 53 random bits.
        double uniform ();
        double uniform (double lo, double hi) { return lo + (hi - lo) * uniform (); }
        /// Uniform integer in [0, n). n must be > 0.
        std::uint64_t below (std::uint64_t n);
        /// Standard normal via Box-Muller (no cached second value).
        double normal ();

      private:
        std::mt19937_64 engine_;
    };

    /// SplitMix64 finalizer, used to derive independent sub-seeds.
    std::uint64_t mix_seed (std::uint64_t a, std::uint64_t b = 0);

    /// Wraps an angle into [-pi, pi).
    double wrap_angle (double a);
    /// Shortest signed arc from a to b, in (-pi, pi].
    double angle_diff (double a, double b);

    /// Worker count from C2G_THREADS (default: hardware concurrency, at least 1).
    unsigned thread_count ();

    /**
     * @brief Runs body(i) for i in [0, n) over `threads` workers.
     *
     * Jobs are handed out by index; callers write results into per-index slots
     * so output order never depends on scheduling.
     */
    void parallel_for (std::size_t n, unsigned threads, const std::function<void (std::size_t)> &body);

    /// Hex SHA-256 of a byte buffer.
    std::string sha256_hex (std::string_view bytes);
    std::string read_file (const std::string &path);
    void write_file (const std::string &path, std::string_view bytes);

    // Little-endian binary helpers over std::string buffers.
    namespace bin
    {
        void put_u32 (std::string &out, std::uint32_t v);
        void put_u64 (std::string &out, std::uint64_t v);
        void put_f32 (std::string &out, float v);
        void put_f64 (std::string &out, double v);
        void put_magic (std::string &out, std::string_view magic);

        class Reader
        {
          public:
            explicit Reader (std::string_view data) : data_ (data) {}
            std::uint32_t u32 ();
            std::uint64_t u64 ();
            float f32 ();
            double f64 ();
            std::string_view bytes (std::size_t n);
            void expect_magic (std::string_view magic);
            std::size_t remaining () const { return data_.size () - pos_; }
            std::size_t position () const { return pos_; }

          private:
            std::string_view data_;
            std::size_t pos_ = 0;
        };
    } // namespace bin

} // namespace c2g
