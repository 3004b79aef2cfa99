//! Screen AOIs and landmark-derived facial sub-regions.
//!
//! Each trial shows four 200x200 px faces toward the screen corners plus a
//! centered emotion word (steps 2 and 3 only). Within a face, seven regions
//! are cut from the standard 68-point landmark convention and grouped into
//! eye / nose / mouth. Fixations are assigned containment-first, then to the
//! nearest boundary.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::{Point, Polygon, Rect, ScreenGeometry};

/// The six target emotions of the stimulus set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Emotion {
    Angry,
    Disgust,
    Fear,
    Happy,
    Sad,
    Surprise,
}

impl Emotion {
    pub const ALL: [Emotion; 6] = [
        Emotion::Angry,
        Emotion::Disgust,
        Emotion::Fear,
        Emotion::Happy,
        Emotion::Sad,
        Emotion::Surprise,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Emotion::Angry => "angry",
            Emotion::Disgust => "disgust",
            Emotion::Fear => "fear",
            Emotion::Happy => "happy",
            Emotion::Sad => "sad",
            Emotion::Surprise => "surprise",
        }
    }

    pub fn from_str(s: &str) -> Option<Emotion> {
        Emotion::ALL.iter().copied().find(|e| e.as_str() == s)
    }

    pub fn index(&self) -> usize {
        Emotion::ALL.iter().position(|e| e == self).unwrap()
    }
}

/// One of the seven landmark-derived facial regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Region {
    Jaw,
    RightEyebrow,
    LeftEyebrow,
    Nose,
    RightEye,
    LeftEye,
    Mouth,
}

impl Region {
    pub const ALL: [Region; 7] = [
        Region::Jaw,
        Region::RightEyebrow,
        Region::LeftEyebrow,
        Region::Nose,
        Region::RightEye,
        Region::LeftEye,
        Region::Mouth,
    ];

    /// Landmark index range of this region in the 68-point convention:
    /// jaw 0-16, right brow 17-21, left brow 22-26, nose 27-35,
    /// right eye 36-41, left eye 42-47, mouth 48-67.
    pub fn landmark_range(&self) -> core::ops::RangeInclusive<usize> {
        match self {
            Region::Jaw => 0..=16,
            Region::RightEyebrow => 17..=21,
            Region::LeftEyebrow => 22..=26,
            Region::Nose => 27..=35,
            Region::RightEye => 36..=41,
            Region::LeftEye => 42..=47,
            Region::Mouth => 48..=67,
        }
    }

    /// The fixed region -> group map. Eyebrows count toward the eye group,
    /// the jaw toward the mouth group (its spatially adjacent group).
    pub fn group(&self) -> RegionGroup {
        match self {
            Region::RightEye | Region::LeftEye | Region::RightEyebrow | Region::LeftEyebrow => {
                RegionGroup::Eye
            }
            Region::Nose => RegionGroup::Nose,
            Region::Mouth | Region::Jaw => RegionGroup::Mouth,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Jaw => "jaw",
            Region::RightEyebrow => "right-eyebrow",
            Region::LeftEyebrow => "left-eyebrow",
            Region::Nose => "nose",
            Region::RightEye => "right-eye",
            Region::LeftEye => "left-eye",
            Region::Mouth => "mouth",
        }
    }

    pub fn from_str(s: &str) -> Option<Region> {
        Region::ALL.iter().copied().find(|r| r.as_str() == s)
    }

    pub fn index(&self) -> usize {
        Region::ALL.iter().position(|r| r == self).unwrap()
    }
}

/// The three region groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum RegionGroup {
    Eye,
    Nose,
    Mouth,
}

impl RegionGroup {
    pub const ALL: [RegionGroup; 3] = [RegionGroup::Eye, RegionGroup::Nose, RegionGroup::Mouth];

    pub fn as_str(&self) -> &'static str {
        match self {
            RegionGroup::Eye => "eye",
            RegionGroup::Nose => "nose",
            RegionGroup::Mouth => "mouth",
        }
    }

    pub fn from_str(s: &str) -> Option<RegionGroup> {
        RegionGroup::ALL.iter().copied().find(|g| g.as_str() == s)
    }

    pub fn index(&self) -> usize {
        RegionGroup::ALL.iter().position(|g| g == self).unwrap()
    }
}

/// One face of a trial: which emotion and identity it shows and where it sits
/// in steps 1/2 (same placement) and 3 (re-randomized).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FaceSpec {
    pub face_id: String,
    pub emotion: Emotion,
    pub identity: String,
    pub rect_step1: Rect,
    pub rect_step3: Rect,
}

/// Stimulus plan of one trial.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrialManifest {
    pub trial_id: u32,
    pub round: u8,
    pub target_emotion: Emotion,
    pub target_face_index: usize,
    pub faces: Vec<FaceSpec>,
}

/// Side length of the placed face images, px.
pub const FACE_SIZE_PX: f64 = 200.0;

impl TrialManifest {
    pub fn validate(&self) -> Result<(), String> {
        if self.faces.len() != 4 {
            return Err(format!(
                "trial {}: expected 4 faces, got {}",
                self.trial_id,
                self.faces.len()
            ));
        }
        if self.target_face_index >= 4 {
            return Err(format!(
                "trial {}: target_face_index {} out of range",
                self.trial_id, self.target_face_index
            ));
        }
        if !(self.round == 1 || self.round == 2) {
            return Err(format!("trial {}: round must be 1 or 2", self.trial_id));
        }
        let targets = self
            .faces
            .iter()
            .filter(|f| f.emotion == self.target_emotion)
            .count();
        if targets != 1 {
            return Err(format!(
                "trial {}: exactly one face must carry the target emotion (found {})",
                self.trial_id, targets
            ));
        }
        if self.faces[self.target_face_index].emotion != self.target_emotion {
            return Err(format!(
                "trial {}: face {} does not carry the target emotion",
                self.trial_id, self.target_face_index
            ));
        }
        for f in &self.faces {
            for (rect, name) in [(f.rect_step1, "rect_step1"), (f.rect_step3, "rect_step3")] {
                if rect.w != FACE_SIZE_PX || rect.h != FACE_SIZE_PX {
                    return Err(format!(
                        "trial {}: {} of {} is {}x{}, faces are {}x{} px",
                        self.trial_id, name, f.face_id, rect.w, rect.h, FACE_SIZE_PX, FACE_SIZE_PX
                    ));
                }
            }
        }
        // Step-3 positions must be a permutation of the step-1 corner slots.
        let mut s1: Vec<(u64, u64)> = self
            .faces
            .iter()
            .map(|f| (f.rect_step1.x.to_bits(), f.rect_step1.y.to_bits()))
            .collect();
        let mut s3: Vec<(u64, u64)> = self
            .faces
            .iter()
            .map(|f| (f.rect_step3.x.to_bits(), f.rect_step3.y.to_bits()))
            .collect();
        s1.sort_unstable();
        s3.sort_unstable();
        if s1 != s3 {
            return Err(format!(
                "trial {}: step-3 positions are not a permutation of the step-1 slots",
                self.trial_id
            ));
        }
        Ok(())
    }

    /// Placement rect of face `i` for the given step (steps 1 and 2 share the
    /// step-1 layout).
    pub fn face_rect(&self, i: usize, step: u8) -> Rect {
        if step == 3 {
            self.faces[i].rect_step3
        } else {
            self.faces[i].rect_step1
        }
    }
}

/// 68 facial landmarks in source-image coordinates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Landmarks68 {
    pub source_size: (f64, f64),
    pub points: Vec<Point>,
}

impl Landmarks68 {
    /// Validate the 68-point count; errors name the face.
    pub fn new(face_id: &str, source_size: (f64, f64), points: Vec<Point>) -> Result<Self, String> {
        if points.len() != 68 {
            return Err(format!(
                "{face_id}: expected 68 landmarks, got {}",
                points.len()
            ));
        }
        if !(source_size.0 > 0.0 && source_size.1 > 0.0) {
            return Err(format!("{face_id}: source size must be positive"));
        }
        Ok(Landmarks68 {
            source_size,
            points,
        })
    }

    /// A schematic 68-point face in a 500x500 source frame, laid out on the
    /// standard index convention. Used by the simulator and as a test
    /// stand-in for detector output.
    pub fn synthetic() -> Self {
        let mut points = Vec::with_capacity(68);
        // Jaw 0-16: arc from left temple through the chin to right temple.
        for i in 0..17 {
            let t = i as f64 / 16.0; // 0..1 left to right
            let angle = core::f64::consts::PI * (1.0 - t); // pi..0
            let x = 250.0 + 145.0 * libm::cos(angle);
            let y = 220.0 + 230.0 * libm::sin(angle);
            points.push(Point::new(x, y));
        }
        // Right eyebrow 17-21 (subject's right = image left).
        for i in 0..5 {
            let t = i as f64 / 4.0;
            points.push(Point::new(130.0 + 90.0 * t, 158.0 - 10.0 * libm::sin(core::f64::consts::PI * t)));
        }
        // Left eyebrow 22-26.
        for i in 0..5 {
            let t = i as f64 / 4.0;
            points.push(Point::new(280.0 + 90.0 * t, 158.0 - 10.0 * libm::sin(core::f64::consts::PI * t)));
        }
        // Nose 27-35: bridge 27-30 down the midline, base 31-35 across.
        points.push(Point::new(250.0, 190.0));
        points.push(Point::new(251.0, 220.0));
        points.push(Point::new(252.0, 250.0));
        points.push(Point::new(251.0, 275.0));
        points.push(Point::new(210.0, 300.0));
        points.push(Point::new(230.0, 310.0));
        points.push(Point::new(250.0, 315.0));
        points.push(Point::new(270.0, 310.0));
        points.push(Point::new(290.0, 300.0));
        // Right eye 36-41: hexagon around (175, 200).
        let eye = |cx: f64, cy: f64, points: &mut Vec<Point>| {
            points.push(Point::new(cx - 30.0, cy));
            points.push(Point::new(cx - 12.0, cy - 12.0));
            points.push(Point::new(cx + 12.0, cy - 12.0));
            points.push(Point::new(cx + 30.0, cy));
            points.push(Point::new(cx + 12.0, cy + 12.0));
            points.push(Point::new(cx - 12.0, cy + 12.0));
        };
        eye(175.0, 200.0, &mut points);
        // Left eye 42-47.
        eye(325.0, 200.0, &mut points);
        // Mouth 48-67: outer ring of 12 then inner ring of 8, around (250, 370).
        for i in 0..12 {
            let a = core::f64::consts::TAU * i as f64 / 12.0;
            points.push(Point::new(250.0 + 55.0 * libm::cos(a), 370.0 + 25.0 * libm::sin(a)));
        }
        for i in 0..8 {
            let a = core::f64::consts::TAU * i as f64 / 8.0;
            points.push(Point::new(250.0 + 30.0 * libm::cos(a), 370.0 + 10.0 * libm::sin(a)));
        }
        Landmarks68::new("synthetic", (500.0, 500.0), points).unwrap()
    }
}

/// Landmarks per face id.
pub type LandmarkSet = BTreeMap<String, Landmarks68>;

/// A face's screen-space AOI for one step: bounding rect plus the seven
/// region polygons (ordered as [`Region::ALL`]).
#[derive(Debug, Clone, PartialEq)]
pub struct FaceAoi {
    pub face_index: usize,
    pub face_id: String,
    pub emotion: Emotion,
    pub rect: Rect,
    pub regions: Vec<Polygon>,
}

/// The screen-level AOI map of one trial at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiMap {
    pub step: u8,
    pub faces: Vec<FaceAoi>,
    /// Present for steps 2 and 3 (the word is not on screen in step 1).
    pub word_rect: Option<Rect>,
}

/// Default emotion-word AOI: 300x60 px centered on the screen.
pub fn default_word_rect(geometry: &ScreenGeometry) -> Rect {
    let c = geometry.screen_center();
    Rect::new(c.x - 150.0, c.y - 30.0, 300.0, 60.0)
}

/// Build the AOI map for a trial and step by scaling each face's landmarks
/// into its placed rect.
pub fn build_aoi_map(
    trial: &TrialManifest,
    landmarks: &LandmarkSet,
    step: u8,
    word_rect: Rect,
) -> Result<AoiMap, String> {
    let mut faces = Vec::with_capacity(trial.faces.len());
    for (i, face) in trial.faces.iter().enumerate() {
        let lm = landmarks
            .get(&face.face_id)
            .ok_or_else(|| format!("missing landmarks for face {}", face.face_id))?;
        let rect = trial.face_rect(i, step);
        let sx = rect.w / lm.source_size.0;
        let sy = rect.h / lm.source_size.1;
        let map_point = |p: &Point| Point::new(rect.x + p.x * sx, rect.y + p.y * sy);
        let regions = Region::ALL
            .iter()
            .map(|r| {
                Polygon::new(
                    lm.points[*r.landmark_range().start()..=*r.landmark_range().end()]
                        .iter()
                        .map(map_point)
                        .collect(),
                )
            })
            .collect();
        faces.push(FaceAoi {
            face_index: i,
            face_id: face.face_id.clone(),
            emotion: face.emotion,
            rect,
            regions,
        });
    }
    Ok(AoiMap {
        step,
        faces,
        word_rect: (step >= 2).then_some(word_rect),
    })
}

/// Which main AOI a fixation landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MainAoi {
    Face(usize),
    Word,
    None,
}

/// The outcome of assigning one fixation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoiAssignment {
    pub main: MainAoi,
    pub is_target: bool,
    pub region: Option<Region>,
    pub group: Option<RegionGroup>,
    /// Distance to the chosen main AOI's boundary; 0 when contained.
    pub distance_px: f64,
    /// Set when the choice involved an exact distance tie (broken by lowest
    /// AOI index / region order).
    pub tie: bool,
}

impl AoiAssignment {
    pub fn none() -> Self {
        AoiAssignment {
            main: MainAoi::None,
            is_target: false,
            region: None,
            group: None,
            distance_px: f64::INFINITY,
            tie: false,
        }
    }
}

/// Assign a fixation point to the nearest AOI: containment first, then
/// minimum boundary distance. `max_distance_px` (disabled by default) caps
/// the search; beyond it the point maps to `MainAoi::None`.
pub fn assign_fixation(
    point: Point,
    map: &AoiMap,
    target_face_index: usize,
    max_distance_px: Option<f64>,
) -> AoiAssignment {
    // Main AOIs in index order: face0..face3, then word.
    let mut contained: Vec<MainAoi> = Vec::new();
    for f in &map.faces {
        if f.rect.contains(point) {
            contained.push(MainAoi::Face(f.face_index));
        }
    }
    if let Some(w) = map.word_rect {
        if w.contains(point) {
            contained.push(MainAoi::Word);
        }
    }

    let (main, distance, mut tie) = if contained.len() == 1 {
        (contained[0], 0.0, false)
    } else if contained.len() > 1 {
        // Overlapping AOIs: lowest index wins, flagged as a tie.
        (contained[0], 0.0, true)
    } else {
        let mut best: Option<(MainAoi, f64)> = None;
        let mut tie = false;
        let mut consider = |aoi: MainAoi, d: f64| match best {
            None => best = Some((aoi, d)),
            Some((_, bd)) => {
                if d < bd {
                    best = Some((aoi, d));
                    tie = false;
                } else if d == bd {
                    tie = true; // keep the earlier (lower-index) AOI
                }
            }
        };
        for f in &map.faces {
            consider(MainAoi::Face(f.face_index), f.rect.exterior_distance(point));
        }
        if let Some(w) = map.word_rect {
            consider(MainAoi::Word, w.exterior_distance(point));
        }
        let (aoi, d) = best.expect("maps always carry at least one AOI");
        match max_distance_px {
            Some(cap) if d > cap => return AoiAssignment::none(),
            _ => (aoi, d, tie),
        }
    };

    let (region, group, region_tie) = match main {
        MainAoi::Face(i) => {
            let face = &map.faces[i];
            let (r, t) = assign_region(point, face);
            (Some(r), Some(r.group()), t)
        }
        _ => (None, None, false),
    };
    tie |= region_tie;

    AoiAssignment {
        main,
        is_target: main == MainAoi::Face(target_face_index),
        region,
        group,
        distance_px: distance,
        tie,
    }
}

/// Sub-region choice within a face: containing polygon if unique; with
/// multiple containments (nested regions such as the jaw ring around the
/// mouth) or none, the minimum boundary distance decides. Ties break by the
/// fixed [`Region::ALL`] order.
fn assign_region(point: Point, face: &FaceAoi) -> (Region, bool) {
    let containing: Vec<usize> = (0..7)
        .filter(|&i| face.regions[i].contains(point))
        .collect();
    let candidates: Vec<usize> = if containing.len() == 1 {
        return (Region::ALL[containing[0]], false);
    } else if containing.is_empty() {
        (0..7).collect()
    } else {
        containing
    };
    let mut best_i = candidates[0];
    let mut best_d = face.regions[best_i].boundary_distance(point);
    let mut tie = false;
    for &i in &candidates[1..] {
        let d = face.regions[i].boundary_distance(point);
        if d < best_d {
            best_d = d;
            best_i = i;
            tie = false;
        } else if d == best_d {
            tie = true;
        }
    }
    (Region::ALL[best_i], tie)
}

/// Source-frame anchor points used by the simulator to aim fixations at a
/// specific region of the synthetic face.
pub fn synthetic_region_anchors() -> [(Region, Point); 7] {
    [
        (Region::Jaw, Point::new(250.0, 438.0)),
        (Region::RightEyebrow, Point::new(175.0, 153.0)),
        (Region::LeftEyebrow, Point::new(325.0, 153.0)),
        (Region::Nose, Point::new(250.0, 295.0)),
        (Region::RightEye, Point::new(175.0, 200.0)),
        (Region::LeftEye, Point::new(325.0, 200.0)),
        (Region::Mouth, Point::new(250.0, 387.0)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    use crate::testutil::{landmark_set, manifest};

    fn word() -> Rect {
        default_word_rect(&ScreenGeometry::default())
    }

    #[test]
    fn manifest_validates() {
        manifest().validate().unwrap();
    }

    #[test]
    fn manifest_rejects_duplicate_target_emotion() {
        let mut m = manifest();
        m.faces[0].emotion = Emotion::Fear;
        assert!(m.validate().unwrap_err().contains("exactly one face"));
    }

    #[test]
    fn manifest_rejects_bad_step3_slots() {
        let mut m = manifest();
        m.faces[0].rect_step3 = Rect::new(0.0, 0.0, 200.0, 200.0);
        assert!(m.validate().is_err());
    }

    #[test]
    fn landmark_count_is_enforced() {
        let pts: Vec<Point> = (0..67).map(|i| Point::new(i as f64, 0.0)).collect();
        let err = Landmarks68::new("F01", (500.0, 500.0), pts).unwrap_err();
        assert_eq!(err, "F01: expected 68 landmarks, got 67");
    }

    #[test]
    fn affine_midpoint_maps_to_rect_center() {
        // A landmark at (250,250) in a 500x500 source, face placed with
        // top-left (100,100): the mapped point is (200,200).
        let mut m = manifest();
        for f in &mut m.faces {
            f.rect_step1 = Rect::new(100.0, 100.0, 200.0, 200.0);
        }
        // Bypass slot validation; we only exercise the scaling here.
        let mut set = LandmarkSet::new();
        let mut pts = vec![Point::new(0.0, 0.0); 68];
        pts[30] = Point::new(250.0, 250.0);
        for i in 0..4 {
            set.insert(
                format!("F{i:02}"),
                Landmarks68::new("x", (500.0, 500.0), pts.clone()).unwrap(),
            );
        }
        let map = build_aoi_map(&m, &set, 1, word()).unwrap();
        // Landmark 30 is nose index 3 (range 27..=35).
        let p = map.faces[0].regions[Region::Nose.index()].vertices[3];
        assert_eq!(p, Point::new(200.0, 200.0));
    }

    #[test]
    fn mouth_polygon_uses_indices_48_to_67() {
        // Cross-checked against the standard 68-point annotation chart:
        // mouth = indices 48..=67 (12 outer + 8 inner lip points).
        assert_eq!(Region::Mouth.landmark_range(), 48..=67);
        let map = build_aoi_map(&manifest(), &landmark_set(), 1, word()).unwrap();
        let lm = Landmarks68::synthetic();
        let face = &map.faces[2];
        let poly = &face.regions[Region::Mouth.index()];
        assert_eq!(poly.vertices.len(), 20);
        for (k, v) in poly.vertices.iter().enumerate() {
            let src = lm.points[48 + k];
            let expected = Point::new(
                face.rect.x + src.x * (face.rect.w / 500.0),
                face.rect.y + src.y * (face.rect.h / 500.0),
            );
            assert_eq!(*v, expected);
        }
    }

    #[test]
    fn word_rect_is_screen_centered() {
        let w = word();
        let c = w.center();
        assert_eq!((c.x, c.y), (512.0, 384.0));
        let map = build_aoi_map(&manifest(), &landmark_set(), 2, w).unwrap();
        assert_eq!(map.word_rect, Some(w));
        // No word AOI in step 1.
        let map1 = build_aoi_map(&manifest(), &landmark_set(), 1, w).unwrap();
        assert_eq!(map1.word_rect, None);
    }

    #[test]
    fn missing_landmarks_error_names_face() {
        let mut set = landmark_set();
        set.remove("F02");
        let err = build_aoi_map(&manifest(), &set, 1, word()).unwrap_err();
        assert_eq!(err, "missing landmarks for face F02");
    }

    #[test]
    fn containment_in_target_mouth() {
        let m = manifest();
        let map = build_aoi_map(&m, &landmark_set(), 1, word()).unwrap();
        // Mouth anchor: between the inner and outer lip rings of the target
        // face (index 1, placed at (744,80) in step 1). Source (250, 387)
        // scales to rect.x + 100, rect.y + 154.8.
        let p = Point::new(744.0 + 100.0, 80.0 + 154.8);
        let a = assign_fixation(p, &map, m.target_face_index, None);
        assert_eq!(a.main, MainAoi::Face(1));
        assert!(a.is_target);
        assert_eq!(a.region, Some(Region::Mouth));
        assert_eq!(a.group, Some(RegionGroup::Mouth));
        assert_eq!(a.distance_px, 0.0);
    }

    #[test]
    fn equidistant_point_breaks_tie_to_face0() {
        let m = manifest();
        let map = build_aoi_map(&m, &landmark_set(), 1, word()).unwrap();
        // Faces 0 and 1 sit at y in [80,280], x in [80,280] and [744,944].
        // The vertical midline x = 512 is equidistant (232 px) from both
        // inner edges; pick y inside their vertical span but outside the
        // word rect's reach.
        let p = Point::new(512.0, 120.0);
        let d0 = map.faces[0].rect.exterior_distance(p);
        let d1 = map.faces[1].rect.exterior_distance(p);
        assert_eq!(d0, d1);
        let a = assign_fixation(p, &map, 0, None);
        assert_eq!(a.main, MainAoi::Face(0));
        assert!(a.tie);
        assert_eq!(a.distance_px, d0);
    }

    /// Independent oracle: min distance to a polygon boundary by densely
    /// sampling every edge.
    fn sampled_boundary_distance(poly: &Polygon, p: Point) -> f64 {
        let n = poly.vertices.len();
        let mut best = f64::INFINITY;
        for i in 0..n {
            let a = poly.vertices[i];
            let b = poly.vertices[(i + 1) % n];
            for k in 0..=1000 {
                let t = k as f64 / 1000.0;
                let q = Point::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y));
                best = best.min(p.distance(q));
            }
        }
        best
    }

    /// Landmarks with the regions pushed far apart, for isolating the
    /// nearest-region rule.
    fn spread_landmarks() -> Landmarks68 {
        let mut pts = Vec::with_capacity(68);
        for i in 0..17 {
            pts.push(Point::new(20.0 + i as f64 * 460.0 / 16.0, 480.0));
        }
        for i in 0..5 {
            pts.push(Point::new(30.0 + i as f64 * 25.0, 20.0));
        }
        for i in 0..5 {
            pts.push(Point::new(370.0 + i as f64 * 25.0, 20.0));
        }
        for p in [
            (80.0, 210.0),
            (80.0, 230.0),
            (80.0, 250.0),
            (80.0, 270.0),
            (60.0, 290.0),
            (70.0, 295.0),
            (80.0, 300.0),
            (90.0, 295.0),
            (100.0, 290.0),
        ] {
            pts.push(Point::new(p.0, p.1));
        }
        let hexagon = |cx: f64, cy: f64, pts: &mut Vec<Point>| {
            pts.push(Point::new(cx - 30.0, cy));
            pts.push(Point::new(cx - 12.0, cy - 12.0));
            pts.push(Point::new(cx + 12.0, cy - 12.0));
            pts.push(Point::new(cx + 30.0, cy));
            pts.push(Point::new(cx + 12.0, cy + 12.0));
            pts.push(Point::new(cx - 12.0, cy + 12.0));
        };
        hexagon(150.0, 100.0, &mut pts);
        hexagon(400.0, 250.0, &mut pts);
        for i in 0..12 {
            let a = core::f64::consts::TAU * i as f64 / 12.0;
            pts.push(Point::new(250.0 + 55.0 * libm::cos(a), 380.0 + 25.0 * libm::sin(a)));
        }
        for i in 0..8 {
            let a = core::f64::consts::TAU * i as f64 / 8.0;
            pts.push(Point::new(250.0 + 30.0 * libm::cos(a), 380.0 + 10.0 * libm::sin(a)));
        }
        Landmarks68::new("spread", (500.0, 500.0), pts).unwrap()
    }

    #[test]
    fn near_region_assignment_matches_brute_force_oracle() {
        let m = manifest();
        let mut set = LandmarkSet::new();
        for i in 0..4 {
            set.insert(format!("F{i:02}"), spread_landmarks());
        }
        let map = build_aoi_map(&m, &set, 1, word()).unwrap();
        let face = &map.faces[0];
        // 5 px right of the left-eye ring's rightmost vertex, inside the
        // face rect, far from every other region.
        let left_eye = &face.regions[Region::LeftEye.index()];
        let rightmost = left_eye
            .vertices
            .iter()
            .cloned()
            .reduce(|a, b| if a.x >= b.x { a } else { b })
            .unwrap();
        let p = Point::new(rightmost.x + 5.0, rightmost.y);
        assert!(face.rect.contains(p));
        let d_eye = sampled_boundary_distance(left_eye, p);
        assert!((d_eye - 5.0).abs() < 0.01, "d_eye = {d_eye}");
        for r in Region::ALL {
            if r == Region::LeftEye {
                continue;
            }
            let d = sampled_boundary_distance(&face.regions[r.index()], p);
            assert!(d >= 20.0, "{} is only {d} px away", r.as_str());
        }
        let a = assign_fixation(p, &map, 0, None);
        assert_eq!(a.region, Some(Region::LeftEye));
        assert_eq!(a.group, Some(RegionGroup::Eye));
        // Implementation distance agrees with the sampled oracle.
        let impl_d = left_eye.boundary_distance(p);
        assert!((impl_d - d_eye).abs() < 1e-3);
    }

    #[test]
    fn every_point_in_face_rect_gets_a_group() {
        let m = manifest();
        let map = build_aoi_map(&m, &landmark_set(), 1, word()).unwrap();
        let rect = map.faces[3].rect;
        let mut rng = crate::rng::Rng::new(99);
        for _ in 0..500 {
            let p = Point::new(
                rng.range_f64(rect.x, rect.x + rect.w),
                rng.range_f64(rect.y, rect.y + rect.h),
            );
            let a = assign_fixation(p, &map, 0, None);
            assert_eq!(a.main, MainAoi::Face(3));
            assert!(a.group.is_some(), "no group at {p:?}");
            assert_eq!(a.group, a.region.map(|r| r.group()));
        }
    }

    #[test]
    fn assignment_is_deterministic() {
        let m = manifest();
        let map = build_aoi_map(&m, &landmark_set(), 3, word()).unwrap();
        let mut rng = crate::rng::Rng::new(5);
        for _ in 0..200 {
            let p = Point::new(rng.range_f64(0.0, 1024.0), rng.range_f64(0.0, 768.0));
            let a = assign_fixation(p, &map, 2, None);
            let b = assign_fixation(p, &map, 2, None);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn permuting_manifest_relabels_assignments() {
        let m = manifest();
        let set = landmark_set();
        let map = build_aoi_map(&m, &set, 1, word()).unwrap();

        // Rotate the face list by one; face i of the permuted manifest is
        // face (i+1)%4 of the original.
        let mut pm = m.clone();
        pm.faces.rotate_left(1);
        pm.target_face_index = 0;
        pm.validate().unwrap();
        let pmap = build_aoi_map(&pm, &set, 1, word()).unwrap();

        let mut rng = crate::rng::Rng::new(17);
        for _ in 0..300 {
            let p = Point::new(rng.range_f64(0.0, 1024.0), rng.range_f64(0.0, 768.0));
            let a = assign_fixation(p, &map, 1, None);
            let b = assign_fixation(p, &pmap, 0, None);
            let relabeled = match a.main {
                MainAoi::Face(i) => MainAoi::Face((i + 3) % 4),
                other => other,
            };
            assert_eq!(b.main, relabeled);
            assert_eq!(a.region, b.region);
            assert_eq!(a.is_target, b.is_target);
        }
    }

    #[test]
    fn max_distance_cap_yields_none() {
        let m = manifest();
        let map = build_aoi_map(&m, &landmark_set(), 1, word()).unwrap();
        let far = Point::new(512.0, 384.0); // screen center, no word in step 1
        let uncapped = assign_fixation(far, &map, 0, None);
        assert!(matches!(uncapped.main, MainAoi::Face(_)));
        let capped = assign_fixation(far, &map, 0, Some(10.0));
        assert_eq!(capped.main, MainAoi::None);
        assert_eq!(capped.region, None);
    }

    #[test]
    fn synthetic_region_anchors_assign_to_their_region() {
        // The simulator aims fixations at these anchors; each must resolve
        // to its own region after placement scaling.
        let m = manifest();
        let map = build_aoi_map(&m, &landmark_set(), 1, word()).unwrap();
        for (region, src) in super::synthetic_region_anchors() {
            for face in &map.faces {
                let p = Point::new(
                    face.rect.x + src.x * face.rect.w / 500.0,
                    face.rect.y + src.y * face.rect.h / 500.0,
                );
                let a = assign_fixation(p, &map, 0, None);
                assert_eq!(a.main, MainAoi::Face(face.face_index));
                assert_eq!(a.region, Some(region), "anchor for {}", region.as_str());
            }
        }
    }
}
