#include "tv/imaging.hpp"

#include <cmath>
#include <fstream>

#include "tv/rng.hpp"

namespace tv {

namespace {

struct PnmHeader {
  int magic = 0;  // 5 or 6
  int width = 0, height = 0, maxval = 0;
};

// Reads the textual header: magic, whitespace/comments, width, height, maxval,
// then exactly one whitespace byte before the raster.
PnmHeader read_header(std::istream& in, const std::string& path) {
  auto fail = [&](const std::string& why) {
    throw std::runtime_error(path + ": " + why);
  };
  char p = 0, m = 0;
  in.get(p);
  in.get(m);
  if (!in || p != 'P' || (m != '5' && m != '6')) fail("not a binary P5/P6 NetPBM file");
  PnmHeader h;
  h.magic = m - '0';
  int fields[3];
  for (int i = 0; i < 3; ++i) {
    int ch = in.peek();
    while (in && (std::isspace(ch) || ch == '#')) {
      if (ch == '#') {
        std::string line;
        std::getline(in, line);
      } else {
        in.get();
      }
      ch = in.peek();
    }
    if (!(in >> fields[i])) fail("malformed header");
  }
  if (!std::isspace(in.get())) fail("malformed header");
  h.width = fields[0];
  h.height = fields[1];
  h.maxval = fields[2];
  if (h.width < 1 || h.height < 1 || h.maxval < 1 || h.maxval > 65535) fail("bad header values");
  return h;
}

}  // namespace

Image load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  const PnmHeader h = read_header(in, path);
  const int channels = h.magic == 5 ? 1 : 3;
  const bool wide = h.maxval > 255;
  const long npix = static_cast<long>(h.width) * h.height;
  const long nbytes = npix * channels * (wide ? 2 : 1);
  std::vector<unsigned char> raw(nbytes);
  in.read(reinterpret_cast<char*>(raw.data()), nbytes);
  if (in.gcount() != nbytes) throw std::runtime_error(path + ": truncated pixel data");

  Image img(h.height, h.width, channels);
  const double scale = 1.0 / h.maxval;
  long pos = 0;
  // raster order: rows top to bottom, channels interleaved
  for (int r = 0; r < h.height; ++r) {
    for (int c = 0; c < h.width; ++c) {
      for (int ch = 0; ch < channels; ++ch) {
        unsigned v;
        if (wide) {
          v = (static_cast<unsigned>(raw[pos]) << 8) | raw[pos + 1];
          pos += 2;
        } else {
          v = raw[pos++];
        }
        img.at(r, c, ch) = v * scale;
      }
    }
  }
  return img;
}

void save_image(const Image& image, const std::string& path, int maxval) {
  if (maxval != 255 && maxval != 65535)
    throw std::invalid_argument("save_image: maxval must be 255 or 65535");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << (image.channels == 1 ? "P5" : "P6") << "\n"
      << image.width << " " << image.height << "\n"
      << maxval << "\n";
  const bool wide = maxval > 255;
  std::vector<unsigned char> raw;
  raw.reserve(image.size() * (wide ? 2 : 1));
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      for (int ch = 0; ch < image.channels; ++ch) {
        double v = std::clamp(image.at(r, c, ch), 0.0, 1.0);
        const unsigned q = static_cast<unsigned>(std::lround(v * maxval));
        if (wide) {
          raw.push_back(static_cast<unsigned char>(q >> 8));
          raw.push_back(static_cast<unsigned char>(q & 0xff));
        } else {
          raw.push_back(static_cast<unsigned char>(q));
        }
      }
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<long>(raw.size()));
  if (!out) throw std::runtime_error(path + ": write failed");
}

Degraded degrade(const Image& x, const DegradationSpec& spec) {
  if (spec.sigma < 0) throw std::invalid_argument("degrade: sigma must be >= 0");
  const Eigen::MatrixXd kernel = make_kernel(spec.kernel);
  if (kernel.rows() > x.height || kernel.cols() > x.width)
    throw std::invalid_argument("degrade: kernel larger than image");
  Degraded out;
  out.K = std::make_shared<CirculantOp>(kernel, x.height, x.width);
  out.f = Image(x.height, x.width, x.channels);
  for (int ch = 0; ch < x.channels; ++ch) {
    Vec blurred = out.K->apply(x.channel(ch));
    if (spec.sigma > 0) {
      Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(ch)));
      for (long i = 0; i < blurred.size(); ++i) blurred[i] += spec.sigma * rng.normal();
    }
    out.f.channel(ch) = blurred;
  }
  return out;
}

double snr_db(const Vec& x_rec, const Vec& x_true) {
  if (x_rec.size() != x_true.size()) throw std::invalid_argument("snr_db: size mismatch");
  const double err = (x_rec - x_true).norm();
  if (err < 1e-15) return 300.0;
  const double sig = (x_true.array() - x_true.mean()).matrix().norm();
  return 20.0 * std::log10(sig / err);
}

double snr_db(const Image& x_rec, const Image& x_true) {
  if (x_rec.height != x_true.height || x_rec.width != x_true.width ||
      x_rec.channels != x_true.channels)
    throw std::invalid_argument("snr_db: image dimensions differ");
  return snr_db(x_rec.data, x_true.data);
}

double mu_auto(double sigma) {
  if (sigma <= 0) throw std::invalid_argument("mu_auto: sigma must be > 0; supply mu explicitly");
  return 0.05 / (sigma * sigma);
}

Image make_phantom(int height, int width, int channels, std::uint64_t seed) {
  Image img(height, width, channels);
  for (int ch = 0; ch < channels; ++ch) {
    Rng rng(mix_seed(seed, 0x70686eull + ch));
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(height, width, 0.2);
    const int nblocks = 12;
    for (int b = 0; b < nblocks; ++b) {
      const int r0 = static_cast<int>(rng.uniform_below(height));
      const int c0 = static_cast<int>(rng.uniform_below(width));
      const int h = height / 8 + static_cast<int>(rng.uniform_below(std::max(1, height * 3 / 8)));
      const int w = width / 8 + static_cast<int>(rng.uniform_below(std::max(1, width * 3 / 8)));
      const double v = 0.05 + 0.9 * rng.uniform01();
      for (int r = r0; r < std::min(height, r0 + h); ++r)
        for (int c = c0; c < std::min(width, c0 + w); ++c) m(r, c) = v;
    }
    const int ndisks = 6;
    for (int b = 0; b < ndisks; ++b) {
      const int r0 = static_cast<int>(rng.uniform_below(height));
      const int c0 = static_cast<int>(rng.uniform_below(width));
      const long rad = height / 12 + static_cast<long>(rng.uniform_below(std::max(1, height / 6)));
      const double v = 0.05 + 0.9 * rng.uniform01();
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
          if (static_cast<long>(r - r0) * (r - r0) + static_cast<long>(c - c0) * (c - c0) <
              rad * rad)
            m(r, c) = v;
    }
    const double pi = 3.14159265358979323846;
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c) {
        const double t =
            m(r, c) + 0.08 * std::sin(2 * pi * r * 3.0 / height) * std::cos(2 * pi * c * 2.0 / width);
        img.at(r, c, ch) = std::clamp(t, 0.0, 1.0);
      }
  }
  return img;
}

Image make_textured_phantom(int height, int width, int channels, std::uint64_t seed) {
  Image img(height, width, channels);
  const double pi = 3.14159265358979323846;
  for (int ch = 0; ch < channels; ++ch) {
    Rng rng(mix_seed(seed, 0x746578ull + ch));
    Eigen::MatrixXd m = Eigen::MatrixXd::Constant(height, width, 0.35);
    for (int b = 0; b < 10; ++b) {
      const int r0 = static_cast<int>(rng.uniform_below(height));
      const int c0 = static_cast<int>(rng.uniform_below(width));
      const int h = height / 8 + static_cast<int>(rng.uniform_below(std::max(1, height * 3 / 8)));
      const int w = width / 8 + static_cast<int>(rng.uniform_below(std::max(1, width * 3 / 8)));
      const double v = 0.1 + 0.8 * rng.uniform01();
      for (int r = r0; r < std::min(height, r0 + h); ++r)
        for (int c = c0; c < std::min(width, c0 + w); ++c) m(r, c) = v;
    }
    // multi-scale detail
    for (int f : {3, 7, 13, 23, 41}) {
      const double p1 = 2 * pi * rng.uniform01(), p2 = 2 * pi * rng.uniform01();
      const double amp = 0.25 / std::sqrt(static_cast<double>(f));
      for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
          m(r, c) += amp * std::sin(2 * pi * f * r / height + p1) *
                     std::sin(2 * pi * f * c / width + p2);
    }
    // smoothed noise field
    Vec noise(static_cast<long>(height) * width);
    for (long i = 0; i < noise.size(); ++i) noise[i] = rng.normal();
    const CirculantOp smooth(KernelSpec::gaussian(std::min({7, height, width}) | 1, 1.5), height,
                             width);
    noise = smooth.apply(noise);
    for (int r = 0; r < height; ++r)
      for (int c = 0; c < width; ++c)
        img.at(r, c, ch) =
            std::clamp(m(r, c) + 0.15 * noise[static_cast<long>(c) * height + r], 0.0, 1.0);
  }
  return img;
}

}  // namespace tv
