#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "ntot/matrix_io.hpp"
#include "test_support.hpp"

namespace ntot {
namespace {

TEST(MatrixIo, RoundTripIsBitExact) {
  std::mt19937_64 gen(21);
  const DenseMatrix a = testing::dense(testing::gaussian(gen, 3, 4));
  const Vector v = testing::gaussian_vector(gen, 5);
  std::stringstream sm, sv;
  write_matrix(sm, a);
  write_vector(sv, v);
  EXPECT_EQ(read_matrix(sm), a);
  EXPECT_EQ(read_vector(sv), v);
}

TEST(MatrixIo, TextFormat) {
  std::ostringstream s;
  write_vector(s, testing::vec({0.1, -2, 3e-300}));
  EXPECT_EQ(s.str(), "3\n0.10000000000000001 -2 3.0000000000000002e-300\n");
  std::ostringstream m;
  write_matrix(m, DenseMatrix::identity(2));
  EXPECT_EQ(m.str(), "2 2\n1 0\n0 1\n");
}

TEST(MatrixIo, MalformedInputRaisesIoError) {
  for (const char* text : {"", "2 2\n1 2 3", "2 2\n1 2 3 x", "2 2\n1 2 3 4 5", "-1 2\n",
                           "0 3\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(read_matrix(in), IoError) << text;
  }
  std::istringstream in("3\n1 2");
  EXPECT_THROW(read_vector(in), IoError);
}

TEST(MatrixIo, FilesRoundTripAndMissingFileFails) {
  const auto dir = std::filesystem::temp_directory_path() / "ntot_io_test";
  std::filesystem::create_directories(dir);
  save_matrix(dir / "a.txt", DenseMatrix::identity(3));
  EXPECT_EQ(load_matrix(dir / "a.txt"), DenseMatrix::identity(3));
  save_vector(dir / "v.txt", testing::vec({1, 2}));
  EXPECT_EQ(load_vector(dir / "v.txt"), testing::vec({1, 2}));
  EXPECT_THROW(load_matrix(dir / "missing.txt"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace ntot
