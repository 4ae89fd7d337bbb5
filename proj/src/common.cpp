#include <c2g/common.hpp>

#include <openssl/evp.h>

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace c2g
{
    void fail (ErrorCode code, const std::string &what) { throw Error (code, what); }

    double Rng::uniform () { return static_cast<double> (engine_ () >> 11) * 0x1.0p-53; }

    std::uint64_t Rng::below (std::uint64_t n)
    {
        // Rejection keeps the mapping unbiased and fully specified.
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max () - std::numeric_limits<std::uint64_t>::max () % n;
        std::uint64_t v;
        do
            v = engine_ ();
        while (v >= limit);
        return v % n;
    }

    double Rng::normal ()
    {
        double u1 = uniform ();
        while (u1 <= 0.0)
            u1 = uniform ();
        const double u2 = uniform ();
        return std::sqrt (-2.0 * std::log (u1)) * std::cos (kTwoPi * u2);
    }

    std::uint64_t mix_seed (std::uint64_t a, std::uint64_t b)
    {
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double wrap_angle (double a)
    {
        if (a >= -kPi && a < kPi)
            return a;
        double r = std::fmod (a + kPi, kTwoPi);
        if (r < 0.0)
            r += kTwoPi;
        r -= kPi;
        // fmod can land exactly on +pi after the shift for inputs like -pi - eps
        if (r >= kPi)
            r -= kTwoPi;
        return r;
    }

    double angle_diff (double a, double b)
    {
        double d = std::fmod (b - a, kTwoPi);
        if (d > kPi)
            d -= kTwoPi;
        else if (d <= -kPi)
            d += kTwoPi;
        return d;
    }

    unsigned thread_count ()
    {
        if (const char *env = std::getenv ("C2G_THREADS"))
        {
            const int v = std::atoi (env);
            if (v > 0)
                return static_cast<unsigned> (v);
        }
        return std::max (1u, std::thread::hardware_concurrency ());
    }

    void parallel_for (std::size_t n, unsigned threads, const std::function<void (std::size_t)> &body)
    {
        if (threads <= 1 || n <= 1)
        {
            for (std::size_t i = 0; i < n; ++i)
                body (i);
            return;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::atomic<bool> failed{false};
        auto worker = [&] {
            for (;;)
            {
                const std::size_t i = next.fetch_add (1);
                if (i >= n || failed.load ())
                    return;
                try
                {
                    body (i);
                }
                catch (...)
                {
                    if (!failed.exchange (true))
                        error = std::current_exception ();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        const unsigned count = static_cast<unsigned> (std::min<std::size_t> (threads, n));
        pool.reserve (count);
        for (unsigned t = 0; t < count; ++t)
            pool.emplace_back (worker);
        for (auto &t : pool)
            t.join ();
        if (error)
            std::rethrow_exception (error);
    }

    std::string sha256_hex (std::string_view bytes)
    {
        unsigned char digest[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_Digest (bytes.data (), bytes.size (), digest, &len, EVP_sha256 (), nullptr) != 1)
            fail (ErrorCode::Internal, "sha256 failed");
        static constexpr char hex[] = "0123456789abcdef";
        std::string out;
        out.reserve (2 * len);
        for (unsigned i = 0; i < len; ++i)
        {
            out.push_back (hex[digest[i] >> 4]);
            out.push_back (hex[digest[i] & 0xf]);
        }
        return out;
    }

    std::string read_file (const std::string &path)
    {
        std::ifstream in (path, std::ios::binary);
        if (!in)
            fail (ErrorCode::Io, "cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf ();
        return ss.str ();
    }

    void write_file (const std::string &path, std::string_view bytes)
    {
        std::ofstream out (path, std::ios::binary | std::ios::trunc);
        if (!out)
            fail (ErrorCode::Io, "cannot write " + path);
        out.write (bytes.data (), static_cast<std::streamsize> (bytes.size ()));
        if (!out)
            fail (ErrorCode::Io, "short write to " + path);
    }

    namespace bin
    {
        namespace
        {
            template <typename T> void put_le (std::string &out, T v)
            {
                static_assert (std::endian::native == std::endian::little, "big-endian hosts are not supported");
                char buf[sizeof (T)];
                std::memcpy (buf, &v, sizeof (T));
                out.append (buf, sizeof (T));
            }
        } // namespace

        void put_u32 (std::string &out, std::uint32_t v) { put_le (out, v); }
        void put_u64 (std::string &out, std::uint64_t v) { put_le (out, v); }
        void put_f32 (std::string &out, float v) { put_le (out, v); }
        void put_f64 (std::string &out, double v) { put_le (out, v); }

        void put_magic (std::string &out, std::string_view magic)
        {
            // 7-character tags padded with a NUL to 8 bytes
            char buf[8] = {};
            std::memcpy (buf, magic.data (), std::min<std::size_t> (magic.size (), 8));
            out.append (buf, 8);
        }

        std::string_view Reader::bytes (std::size_t n)
        {
            if (remaining () < n)
                fail (ErrorCode::Io, "truncated binary record");
            auto v = data_.substr (pos_, n);
            pos_ += n;
            return v;
        }

        namespace
        {
            template <typename T> T get_le (Reader &r)
            {
                T v;
                std::memcpy (&v, r.bytes (sizeof (T)).data (), sizeof (T));
                return v;
            }
        } // namespace

        std::uint32_t Reader::u32 () { return get_le<std::uint32_t> (*this); }
        std::uint64_t Reader::u64 () { return get_le<std::uint64_t> (*this); }
        float Reader::f32 () { return get_le<float> (*this); }
        double Reader::f64 () { return get_le<double> (*this); }

        void Reader::expect_magic (std::string_view magic)
        {
            std::string padded;
            put_magic (padded, magic);
            if (bytes (8) != padded)
                fail (ErrorCode::Io, "bad magic, expected " + std::string (magic));
        }
    } // namespace bin

} // namespace c2g
