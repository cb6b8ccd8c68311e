#include "esas/knnse.hpp"

#include <algorithm>

#include "esas/errors.hpp"

namespace esas::knnse {

namespace {

constexpr std::uint32_t kEnvelopeVersion = 1;

Rational random_integer(RandomSource& rng, std::int64_t bound) {
  return Rational(mpz_class(std::to_string(rng.uniform_int(-bound, bound))));
}

void check_bits(std::span<const std::uint8_t> s, std::size_t expected) {
  if (s.size() != expected) throw InvalidArgument("split vector length mismatch");
  for (auto b : s) {
    if (b > 1) throw InvalidArgument("split vector must contain only 0/1");
  }
}

void write_matrix(ByteWriter& w, const Matrix& m) {
  w.u32(static_cast<std::uint32_t>(m.size()));
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < m.size(); ++c) write_rational(w, m(r, c));
  }
}

Matrix read_matrix(ByteReader& r) {
  const auto n = r.u32();
  if (n == 0 || n > 1u << 12) throw FormatError("bad matrix size");
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = read_rational(r);
  }
  return m;
}

void write_vector(ByteWriter& w, const Vector& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& x : v) write_rational(w, x);
}

Vector read_vector(ByteReader& r) {
  const auto n = r.count(10);
  Vector v;
  v.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) v.push_back(read_rational(r));
  return v;
}

}  // namespace

void write_rational(ByteWriter& w, const Rational& q) {
  w.str(q.get_num().get_str());
  w.str(q.get_den().get_str());
}

Rational read_rational(ByteReader& r) {
  const auto num_s = r.str();
  const auto den_s = r.str();
  mpz_class num, den;
  if (num.set_str(num_s, 10) != 0 || den.set_str(den_s, 10) != 0) throw FormatError("bad rational");
  if (den <= 0) throw FormatError("rational denominator must be positive");
  Rational q(num, den);
  q.canonicalize();
  if (q.get_num() != num || q.get_den() != den || q.get_num().get_str() != num_s) {
    throw FormatError("non-canonical rational");
  }
  return q;
}

Rational dot(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw InvalidArgument("dot: dimension mismatch");
  Rational acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

// ---------------------------------------------------------------------------
// Matrix

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

Matrix Matrix::random(std::size_t n, RandomSource& rng, std::int64_t bound) {
  Matrix m(n);
  for (auto& c : m.cells_) c = random_integer(rng, bound);
  return m;
}

Vector Matrix::multiply(const Vector& v) const {
  if (v.size() != n_) throw InvalidArgument("matrix-vector dimension mismatch");
  Vector out(n_);
  for (std::size_t r = 0; r < n_; ++r) {
    Rational acc = 0;
    for (std::size_t c = 0; c < n_; ++c) acc += (*this)(r, c) * v[c];
    out[r] = std::move(acc);
  }
  return out;
}

Vector Matrix::transpose_multiply(const Vector& v) const {
  if (v.size() != n_) throw InvalidArgument("matrix-vector dimension mismatch");
  Vector out(n_);
  for (std::size_t c = 0; c < n_; ++c) {
    Rational acc = 0;
    for (std::size_t r = 0; r < n_; ++r) acc += (*this)(r, c) * v[r];
    out[c] = std::move(acc);
  }
  return out;
}

Matrix Matrix::operator*(const Matrix& o) const {
  if (o.n_ != n_) throw InvalidArgument("matrix dimension mismatch");
  Matrix out(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      Rational acc = 0;
      for (std::size_t k = 0; k < n_; ++k) acc += (*this)(i, k) * o(k, j);
      out(i, j) = std::move(acc);
    }
  }
  return out;
}

bool Matrix::is_identity() const {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if ((*this)(i, j) != (i == j ? 1 : 0)) return false;
    }
  }
  return true;
}

Rational Matrix::determinant() const {
  Matrix a = *this;
  Rational det = 1;
  for (std::size_t col = 0; col < n_; ++col) {
    std::size_t pivot = col;
    while (pivot < n_ && a(pivot, col) == 0) ++pivot;
    if (pivot == n_) return 0;
    if (pivot != col) {
      for (std::size_t j = 0; j < n_; ++j) std::swap(a(pivot, j), a(col, j));
      det = -det;
    }
    det *= a(col, col);
    for (std::size_t r = col + 1; r < n_; ++r) {
      if (a(r, col) == 0) continue;
      const Rational f = a(r, col) / a(col, col);
      for (std::size_t j = col; j < n_; ++j) a(r, j) -= f * a(col, j);
    }
  }
  return det;
}

Matrix Matrix::inverse() const {
  const bool integral = std::all_of(cells_.begin(), cells_.end(),
                                    [](const Rational& c) { return c.get_den() == 1; });
  return integral ? integer_inverse() : rational_inverse();
}

Matrix Matrix::integer_inverse() const {
  // Fraction-free Gauss-Jordan on [A | I]: every division by the previous
  // pivot is exact. On completion the left block is diagonal and each row of
  // the right block is that row's diagonal entry times the row of A^-1.
  const std::size_t w = 2 * n_;
  std::vector<mpz_class> a(n_ * w);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t c = 0; c < n_; ++c) a[r * w + c] = (*this)(r, c).get_num();
    a[r * w + n_ + r] = 1;
  }
  mpz_class prev = 1;
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t pivot = k;
    while (pivot < n_ && a[pivot * w + k] == 0) ++pivot;
    if (pivot == n_) throw InvalidArgument("matrix is singular");
    if (pivot != k) {
      for (std::size_t j = 0; j < w; ++j) std::swap(a[pivot * w + j], a[k * w + j]);
    }
    const mpz_class& pk = a[k * w + k];
    for (std::size_t i = 0; i < n_; ++i) {
      if (i == k) continue;
      const mpz_class f = a[i * w + k];
      for (std::size_t j = 0; j < w; ++j) {
        if (j == k) continue;
        mpz_class& cell = a[i * w + j];
        cell = pk * cell - f * a[k * w + j];
        mpz_divexact(cell.get_mpz_t(), cell.get_mpz_t(), prev.get_mpz_t());
      }
      a[i * w + k] = 0;
    }
    prev = pk;
  }
  Matrix inv(n_);
  for (std::size_t r = 0; r < n_; ++r) {
    const mpz_class& d = a[r * w + r];
    for (std::size_t c = 0; c < n_; ++c) {
      inv(r, c) = Rational(a[r * w + n_ + c], d);
      inv(r, c).canonicalize();
    }
  }
  return inv;
}

Matrix Matrix::rational_inverse() const {
  // Gauss-Jordan on [A | I].
  Matrix a = *this;
  Matrix inv = identity(n_);
  for (std::size_t col = 0; col < n_; ++col) {
    std::size_t pivot = col;
    while (pivot < n_ && a(pivot, col) == 0) ++pivot;
    if (pivot == n_) throw InvalidArgument("matrix is singular");
    if (pivot != col) {
      for (std::size_t j = 0; j < n_; ++j) {
        std::swap(a(pivot, j), a(col, j));
        std::swap(inv(pivot, j), inv(col, j));
      }
    }
    const Rational p = a(col, col);
    for (std::size_t j = 0; j < n_; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t r = 0; r < n_; ++r) {
      if (r == col || a(r, col) == 0) continue;
      const Rational f = a(r, col);
      for (std::size_t j = 0; j < n_; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Keys

OwnerKey OwnerKey::from_parts(std::vector<std::uint8_t> s, Matrix m1, Matrix m2) {
  if (s.size() < 2) throw InvalidArgument("owner key needs n >= 1");
  check_bits(s, s.size());
  if (m1.size() != s.size() || m2.size() != s.size()) throw InvalidArgument("owner key matrix size mismatch");
  OwnerKey k;
  k.n = s.size() - 1;
  k.s = std::move(s);
  k.m1_inv = m1.inverse();
  k.m2_inv = m2.inverse();
  k.m1 = std::move(m1);
  k.m2 = std::move(m2);
  return k;
}

std::string OwnerKey::to_envelope() const {
  ByteWriter w;
  w.bytes(s);
  write_matrix(w, m1);
  write_matrix(w, m2);
  return wrap_envelope("KNN-KEY", kEnvelopeVersion, w.data());
}

OwnerKey OwnerKey::from_envelope(std::string_view text) {
  const Bytes payload = unwrap_envelope(text, "KNN-KEY", kEnvelopeVersion);
  ByteReader r(payload);
  auto s = r.bytes();
  auto m1 = read_matrix(r);
  auto m2 = read_matrix(r);
  r.expect_end();
  try {
    return from_parts(std::move(s), std::move(m1), std::move(m2));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid KNN key: ") + e.what());
  }
}

OwnerKey owner_keygen(std::size_t n, RandomSource& rng) {
  if (n == 0) throw InvalidArgument("vocabulary dimension must be at least 1");
  std::vector<std::uint8_t> s(n + 1);
  for (auto& b : s) b = rng.coin() ? 1 : 0;
  // Resample a whole matrix whenever it is singular.
  auto draw = [&](Matrix& m, Matrix& inv) {
    for (;;) {
      m = Matrix::random(n + 1, rng);
      try {
        inv = m.inverse();
        return;
      } catch (const InvalidArgument&) {
      }
    }
  };
  OwnerKey k;
  k.n = n;
  k.s = std::move(s);
  draw(k.m1, k.m1_inv);
  draw(k.m2, k.m2_inv);
  return k;
}

// ---------------------------------------------------------------------------
// Encrypted vectors

void EncryptedPair::write(ByteWriter& w) const {
  w.u64(vocabulary_version);
  w.u32(static_cast<std::uint32_t>(first.size()));
  write_vector(w, first);
  write_vector(w, second);
}

EncryptedPair EncryptedPair::read(ByteReader& r) {
  EncryptedPair p;
  p.vocabulary_version = r.u64();
  const auto dim = r.u32();
  p.first = read_vector(r);
  p.second = read_vector(r);
  if (p.first.size() != dim || p.second.size() != dim) throw FormatError("encrypted vector dimension mismatch");
  return p;
}

std::string SecureIndex::to_envelope() const {
  ByteWriter w;
  write(w);
  return wrap_envelope("SECURE-INDEX", kEnvelopeVersion, w.data());
}

SecureIndex SecureIndex::from_envelope(std::string_view text) {
  const Bytes payload = unwrap_envelope(text, "SECURE-INDEX", kEnvelopeVersion);
  ByteReader r(payload);
  SecureIndex s{EncryptedPair::read(r)};
  r.expect_end();
  return s;
}

Bytes Trapdoor::to_bytes() const {
  ByteWriter w;
  write(w);
  return std::move(w).take();
}

std::string Trapdoor::to_envelope() const { return wrap_envelope("TRAPDOOR", kEnvelopeVersion, to_bytes()); }

Trapdoor Trapdoor::from_envelope(std::string_view text) {
  const Bytes payload = unwrap_envelope(text, "TRAPDOOR", kEnvelopeVersion);
  ByteReader r(payload);
  Trapdoor t{EncryptedPair::read(r)};
  r.expect_end();
  return t;
}

// ---------------------------------------------------------------------------
// Index side

Vector extend_index_vector(const PlainVector& v) {
  Vector out(v.values);
  out.emplace_back(1);
  return out;
}

std::pair<Vector, Vector> split_index_vector(const Vector& vstar, std::span<const std::uint8_t> s,
                                             RandomSource& rng) {
  check_bits(s, vstar.size());
  Vector first(vstar.size()), second(vstar.size());
  for (std::size_t t = 0; t < vstar.size(); ++t) {
    if (s[t] == 0) {
      first[t] = vstar[t];
      second[t] = vstar[t];
    } else {
      first[t] = random_integer(rng, kRandomBound);
      second[t] = vstar[t] - first[t];
    }
  }
  return {std::move(first), std::move(second)};
}

SecureIndex encrypt_index(const OwnerKey& key, const PlainVector& v, RandomSource& rng) {
  if (v.dimension() != key.n) {
    throw InvalidArgument("index vector has dimension " + std::to_string(v.dimension()) + ", key expects " +
                          std::to_string(key.n));
  }
  auto [first, second] = split_index_vector(extend_index_vector(v), key.s, rng);
  SecureIndex out;
  out.vocabulary_version = v.vocabulary_version;
  out.first = key.m1.transpose_multiply(first);
  out.second = key.m2.transpose_multiply(second);
  return out;
}

// ---------------------------------------------------------------------------
// Query side

Vector extend_query_vector(const PlainVector& q, const Rational& a, const Rational& r) {
  if (a <= 0) throw InvalidArgument("query scale a must be positive");
  if (r == 0) throw InvalidArgument("query offset r' must be nonzero");
  Vector out;
  out.reserve(q.dimension() + 1);
  for (const auto& x : q.values) out.push_back(a * x);
  out.push_back(r);
  return out;
}

std::pair<Vector, Vector> split_query_vector(const Vector& qstar, std::span<const std::uint8_t> s,
                                             RandomSource& rng) {
  check_bits(s, qstar.size());
  Vector first(qstar.size()), second(qstar.size());
  for (std::size_t t = 0; t < qstar.size(); ++t) {
    if (s[t] == 1) {
      first[t] = qstar[t];
      second[t] = qstar[t];
    } else {
      first[t] = random_integer(rng, kRandomBound);
      second[t] = qstar[t] - first[t];
    }
  }
  return {std::move(first), std::move(second)};
}

TrapdoorResult gen_trapdoor(const OwnerKey& key, const PlainVector& q, RandomSource& rng) {
  if (q.dimension() != key.n) {
    throw InvalidArgument("query vector has dimension " + std::to_string(q.dimension()) + ", key expects " +
                          std::to_string(key.n));
  }
  TrapdoorResult out;
  out.a = Rational(mpz_class(std::to_string(rng.uniform_int(1, kRandomBound))));
  std::int64_t r = 0;
  while (r == 0) r = rng.uniform_int(-kRandomBound, kRandomBound);
  out.r = Rational(mpz_class(std::to_string(r)));

  auto [first, second] = split_query_vector(extend_query_vector(q, out.a, out.r), key.s, rng);
  out.trapdoor.vocabulary_version = q.vocabulary_version;
  out.trapdoor.first = key.m1_inv.multiply(first);
  out.trapdoor.second = key.m2_inv.multiply(second);
  return out;
}

Rational score(const SecureIndex& index, const Trapdoor& trapdoor) {
  if (index.first.size() != trapdoor.first.size() || index.second.size() != trapdoor.second.size() ||
      index.first.size() != index.second.size()) {
    throw InvalidArgument("index and trapdoor dimensions differ");
  }
  return dot(index.first, trapdoor.first) + dot(index.second, trapdoor.second);
}

}  // namespace esas::knnse
