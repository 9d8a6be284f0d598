#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace egopriv {

enum class View { Ego, Exo };
enum class Split { Train, Test };
enum class Attribute { Gender, Race, Age };
enum class Gender { Female, Male };
enum class Race { Asian, Black, White };
enum class Age { Young, MiddleAged, Senior };

std::string_view to_string(View v);
std::string_view to_string(Split s);
std::string_view to_string(Attribute a);
std::string_view to_string(Gender g);
std::string_view to_string(Race r);
std::string_view to_string(Age a);

View parse_view(std::string_view s);
Split parse_split(std::string_view s);
// Accepts "Gender" as well as the lowercase CLI spelling "gender".
Attribute parse_attribute(std::string_view s);
Gender parse_gender(std::string_view s);
Race parse_race(std::string_view s);
Age parse_age(std::string_view s);

// Class names of an attribute in class-index order.
const std::vector<std::string>& class_names(Attribute a);
std::size_t class_count(Attribute a);
int class_index(Attribute a, std::string_view name);

inline constexpr Attribute kAllAttributes[] = {Attribute::Gender, Attribute::Race,
                                               Attribute::Age};

struct ClipRecord {
  std::string clip_id;
  View view = View::Ego;
  std::string identity_id;
  std::string take_id;
  std::optional<std::string> scene_id;
  std::optional<Gender> gender;
  std::optional<Race> race;
  std::optional<Age> age;
  Split split = Split::Train;
  std::uint32_t frame_count = 1;

  // Class index of the demographic label, if annotated.
  std::optional<int> label(Attribute a) const;

  bool operator==(const ClipRecord&) const = default;
};

using FrameMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Frame-level embeddings keyed by clip id; every row block has `dim` columns.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  bool contains(const std::string& clip_id) const { return rows_.count(clip_id) != 0; }

  void insert(const std::string& clip_id, FrameMatrix frames);
  const FrameMatrix& at(const std::string& clip_id) const;
  const std::map<std::string, FrameMatrix>& rows() const { return rows_; }

  // True when every frame vector has unit L2 norm within 1e-5.
  bool normalized() const;

  bool operator==(const EmbeddingTable& other) const;

 private:
  std::size_t dim_ = 0;
  std::map<std::string, FrameMatrix> rows_;
};

EmbeddingTable read_embeddings(const std::filesystem::path& path);
void write_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

std::vector<ClipRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<ClipRecord>& clips, const std::filesystem::path& path);

// Immutable after construction; the constructor validates all cross-table invariants.
class Dataset {
 public:
  Dataset(std::vector<ClipRecord> clips, EmbeddingTable ego, EmbeddingTable exo,
          std::string provenance = {});

  const std::vector<ClipRecord>& clips() const { return clips_; }
  const EmbeddingTable& ego() const { return ego_; }
  const EmbeddingTable& exo() const { return exo_; }
  const EmbeddingTable& table(View v) const { return v == View::Ego ? ego_ : exo_; }
  const std::string& provenance() const { return provenance_; }

  bool contains(const std::string& clip_id) const { return index_.count(clip_id) != 0; }
  const ClipRecord& clip(const std::string& clip_id) const;
  const FrameMatrix& frames(const std::string& clip_id) const;

  // Clips of one view, optionally restricted to a split, in manifest order.
  std::vector<const ClipRecord*> select(View view, std::optional<Split> split = {}) const;

  bool operator==(const Dataset& other) const;

 private:
  std::vector<ClipRecord> clips_;
  EmbeddingTable ego_;
  EmbeddingTable exo_;
  std::string provenance_;
  std::unordered_map<std::string, std::size_t> index_;
};

Dataset ingest(const std::filesystem::path& manifest_path,
               const std::filesystem::path& ego_emb_path,
               const std::filesystem::path& exo_emb_path);

// A bundle directory holds manifest.json, ego.emb, exo.emb and optional provenance.txt.
Dataset load_bundle(const std::filesystem::path& dir);
void save_bundle(const Dataset& dataset, const std::filesystem::path& dir);

enum class RetrievalTask { EgoToEgoIdentity, EgoToExoIdentity, Scene, Moment };

std::string_view to_string(RetrievalTask t);
// Accepts the enum names and the CLI spellings ego2ego, ego2exo, scene, moment.
RetrievalTask parse_task(std::string_view s);

struct GalleryScope {
  std::optional<Split> split;      // nullopt: whole dataset
  View scene_gallery = View::Ego;  // gallery side for Scene retrieval
};

View gallery_view(RetrievalTask task, const GalleryScope& scope = {});

// Clips counted as correct retrievals for an ego query.
std::set<std::string> positive_set(const Dataset& dataset, RetrievalTask task,
                                   const std::string& query_clip,
                                   const GalleryScope& scope = {});

inline constexpr std::size_t kDefaultFrames = 8;

// Uniformly subsamples to at most `max_frames` rows and widens to double.
Eigen::MatrixXd subsample_frames(const FrameMatrix& frames, std::size_t max_frames = kDefaultFrames);

}  // namespace egopriv
