//! Procedural low-poly humanoid.
//!
//! Every body part is a lathe surface (tube or ellipsoid) around a bone axis.
//! Parts are fused into a single mesh, each with its own atlas chart.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::template::{Atlas, AvatarTemplate, BodyRegion, Chart, SkinInfluence};
use super::BodyModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkeletonLayout {
    /// 19 joints: pelvis, spine, chest, neck, head and four-joint limbs.
    Full19,
    /// 16 joints: no spine joint and no separate hand joints.
    Compact16,
}

impl SkeletonLayout {
    pub fn joint_count(self) -> usize {
        match self {
            SkeletonLayout::Full19 => 19,
            SkeletonLayout::Compact16 => 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AvatarBuildConfig {
    pub layout: SkeletonLayout,
    /// Number of shape blendshapes, 2 to 4: height, girth, limb length,
    /// torso stretch.
    pub shape_count: usize,
    /// Uniform scale applied to all rest lengths.
    pub stature: f64,
    pub limb_radius: f64,
    pub torso_half_width: f64,
    pub torso_half_depth: f64,
    pub head_radius: f64,
    pub ring_segments: usize,
    /// Axial distance between consecutive vertex rings (meters).
    pub ring_spacing: f64,
}

impl Default for AvatarBuildConfig {
    fn default() -> Self {
        AvatarBuildConfig {
            layout: SkeletonLayout::Full19,
            shape_count: 4,
            stature: 1.0,
            limb_radius: 0.045,
            torso_half_width: 0.15,
            torso_half_depth: 0.055,
            head_radius: 0.055,
            ring_segments: 12,
            ring_spacing: 0.025,
        }
    }
}

impl AvatarBuildConfig {
    fn validate(&self) -> Result<(), BodyModelError> {
        let err = |m: &str| Err(BodyModelError::Config(m.to_string()));
        let lengths = [
            self.stature,
            self.limb_radius,
            self.torso_half_width,
            self.torso_half_depth,
            self.head_radius,
            self.ring_spacing,
        ];
        if lengths.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return err("lengths and radii must be positive and finite");
        }
        if !(2..=4).contains(&self.shape_count) {
            return err("shape_count must be between 2 and 4");
        }
        if !(6..=64).contains(&self.ring_segments) {
            return err("ring_segments must be between 6 and 64");
        }
        if self.stature > 1.3 {
            return err("stature above 1.3 does not fit the texture atlas");
        }
        Ok(())
    }
}

// Texture layout constants (texture units).
const CHART_WIDTH: f64 = 0.024;
const COLUMN_PITCH: f64 = 0.05;
const ATLAS_MARGIN: f64 = 0.02;
const ANCHOR_PAD: f64 = 0.02;
const CHART_GAP: f64 = 0.01;
const CAP_GAP: f64 = 0.004;
const TEXTURE_UNITS_PER_METER: f64 = 1.0;

const HEIGHT_RATE: f64 = 0.03;
const GIRTH_RATE: f64 = 0.05;
const LIMB_RATE: f64 = 0.04;
const TORSO_RATE: f64 = 0.04;

struct JointDef {
    name: &'static str,
    parent: Option<&'static str>,
    rest: [f64; 3],
}

const fn jd(name: &'static str, parent: Option<&'static str>, rest: [f64; 3]) -> JointDef {
    JointDef { name, parent, rest }
}

const FULL_SKELETON: [JointDef; 19] = [
    jd("pelvis", None, [0.0, 0.0, 0.95]),
    jd("spine", Some("pelvis"), [0.0, 0.0, 1.10]),
    jd("chest", Some("spine"), [0.0, 0.0, 1.30]),
    jd("neck", Some("chest"), [0.0, 0.0, 1.50]),
    jd("head", Some("neck"), [0.0, 0.0, 1.64]),
    jd("l_shoulder", Some("chest"), [0.18, 0.0, 1.43]),
    jd("l_elbow", Some("l_shoulder"), [0.46, 0.0, 1.43]),
    jd("l_wrist", Some("l_elbow"), [0.70, 0.0, 1.43]),
    jd("l_hand", Some("l_wrist"), [0.80, 0.0, 1.43]),
    jd("r_shoulder", Some("chest"), [-0.18, 0.0, 1.43]),
    jd("r_elbow", Some("r_shoulder"), [-0.46, 0.0, 1.43]),
    jd("r_wrist", Some("r_elbow"), [-0.70, 0.0, 1.43]),
    jd("r_hand", Some("r_wrist"), [-0.80, 0.0, 1.43]),
    jd("l_hip", Some("pelvis"), [0.09, 0.0, 0.90]),
    jd("l_knee", Some("l_hip"), [0.09, 0.0, 0.50]),
    jd("l_ankle", Some("l_knee"), [0.09, 0.0, 0.09]),
    jd("r_hip", Some("pelvis"), [-0.09, 0.0, 0.90]),
    jd("r_knee", Some("r_hip"), [-0.09, 0.0, 0.50]),
    jd("r_ankle", Some("r_knee"), [-0.09, 0.0, 0.09]),
];

const COMPACT_DROPPED: [&str; 3] = ["spine", "l_hand", "r_hand"];

/// Joint names of a layout in index order.
pub fn layout_joint_names(layout: SkeletonLayout) -> Vec<&'static str> {
    FULL_SKELETON
        .iter()
        .map(|j| j.name)
        .filter(|n| layout == SkeletonLayout::Full19 || !COMPACT_DROPPED.contains(n))
        .collect()
}

#[derive(Clone, Copy)]
enum Profile {
    /// Constant cross-section; `extension` continues the tube behind its start.
    Tube { extension: f64 },
    /// Ellipsoid centered on `start` with the given axial half-length.
    Ellipsoid { half_length: f64 },
}

#[derive(Clone, Copy)]
enum TorsoLift {
    None,
    Stretch,
    Shift(f64),
}

struct Segment {
    name: String,
    region: BodyRegion,
    owner: usize,
    anchor: Option<usize>,
    start: Vector3<f64>,
    axis: Vector3<f64>,
    length: f64,
    radii: (f64, f64),
    profile: Profile,
    blend: bool,
    limb_chain: Option<(Vector3<f64>, Vector3<f64>)>,
    lift: TorsoLift,
}

struct VertexInfo {
    segment: usize,
    axial: f64,
    axis_point: Vector3<f64>,
}

/// Builds the canonical avatar for `config`.
pub fn build_canonical_avatar(config: &AvatarBuildConfig) -> Result<AvatarTemplate, BodyModelError> {
    config.validate()?;
    let names = layout_joint_names(config.layout);
    let n = names.len();
    let index_of = |name: &str| names.iter().position(|&x| x == name);

    let mut parents = Vec::with_capacity(n);
    let mut rest = Vec::with_capacity(n);
    for &name in &names {
        let def = FULL_SKELETON.iter().find(|j| j.name == name).expect("known joint");
        // nearest kept ancestor
        let mut parent = def.parent;
        while let Some(p) = parent {
            if index_of(p).is_some() {
                break;
            }
            parent = FULL_SKELETON.iter().find(|j| j.name == p).and_then(|j| j.parent);
        }
        parents.push(parent.map(|p| index_of(p).expect("kept parent")));
        rest.push(Vector3::from(def.rest) * config.stature);
    }
    let j = |name: &str| index_of(name).expect("joint present in layout");
    let pos = |name: &str| rest[j(name)];

    let s = config.stature;
    let lr = config.limb_radius;
    let (hw, hd) = (config.torso_half_width, config.torso_half_depth);
    let mut segments = Vec::new();
    let mut tube = |name: &str,
                    region: BodyRegion,
                    owner: usize,
                    anchor: Option<usize>,
                    from: Vector3<f64>,
                    to: Vector3<f64>,
                    radii: (f64, f64),
                    extension: f64| {
        let d = to - from;
        segments.push(Segment {
            name: name.to_string(),
            region,
            owner,
            anchor,
            start: from,
            axis: d.normalize(),
            length: d.norm(),
            radii,
            profile: Profile::Tube { extension },
            blend: true,
            limb_chain: None,
            lift: TorsoLift::None,
        });
    };

    let pelvis = j("pelvis");
    match config.layout {
        SkeletonLayout::Full19 => {
            let (spine, chest) = (j("spine"), j("chest"));
            tube(
                "torso_lower",
                BodyRegion::Torso,
                pelvis,
                Some(pelvis),
                pos("pelvis"),
                pos("spine"),
                (0.87 * hw, hd),
                0.09 * s,
            );
            tube("torso_mid", BodyRegion::Torso, spine, Some(spine), pos("spine"), pos("chest"), (0.93 * hw, hd), 0.0);
            tube("torso_upper", BodyRegion::Torso, chest, Some(chest), pos("chest"), pos("neck"), (hw, hd), 0.0);
        }
        SkeletonLayout::Compact16 => {
            let chest = j("chest");
            tube(
                "torso_lower",
                BodyRegion::Torso,
                pelvis,
                Some(pelvis),
                pos("pelvis"),
                pos("chest"),
                (0.9 * hw, hd),
                0.09 * s,
            );
            tube("torso_upper", BodyRegion::Torso, chest, Some(chest), pos("chest"), pos("neck"), (hw, hd), 0.0);
        }
    }
    let neck = j("neck");
    let head_half = 0.095 * s;
    tube(
        "neck",
        BodyRegion::Neck,
        neck,
        Some(neck),
        pos("neck"),
        pos("neck") + Vector3::new(0.0, 0.0, 0.07 * s),
        (0.75 * lr, 0.75 * lr),
        0.0,
    );
    let head = j("head");
    let mut ellipsoids = vec![(
        "head".to_string(),
        BodyRegion::Head,
        head,
        Some(head),
        pos("head"),
        Vector3::z(),
        head_half,
        (config.head_radius, config.head_radius),
    )];

    for side in ["l", "r"] {
        let sh = j(&format!("{side}_shoulder"));
        let el = j(&format!("{side}_elbow"));
        let wr = j(&format!("{side}_wrist"));
        let arm_dir = (rest[el] - rest[sh]).normalize();
        tube(&format!("{side}_upper_arm"), BodyRegion::UpperArm, sh, Some(sh), rest[sh], rest[el], (lr, lr), 0.03 * s);
        tube(
            &format!("{side}_forearm"),
            BodyRegion::Forearm,
            el,
            Some(el),
            rest[el],
            rest[wr],
            (0.9 * lr, 0.9 * lr),
            0.0,
        );
        tube(
            &format!("{side}_wrist"),
            BodyRegion::Wrist,
            wr,
            Some(wr),
            rest[wr],
            rest[wr] + arm_dir * 0.04 * s,
            (0.7 * lr, 0.7 * lr),
            0.0,
        );
        let (hand_owner, hand_center) = match index_of(&format!("{side}_hand")) {
            Some(h) => (h, rest[h]),
            None => (wr, rest[wr] + arm_dir * 0.10 * s),
        };
        let hand_anchor = (config.layout == SkeletonLayout::Full19).then_some(hand_owner);
        ellipsoids.push((
            format!("{side}_hand"),
            BodyRegion::Hand,
            hand_owner,
            hand_anchor,
            hand_center,
            arm_dir,
            0.06 * s,
            (lr, 0.5 * lr),
        ));

        let hip = j(&format!("{side}_hip"));
        let knee = j(&format!("{side}_knee"));
        let ankle = j(&format!("{side}_ankle"));
        tube(
            &format!("{side}_thigh"),
            BodyRegion::Thigh,
            hip,
            Some(hip),
            rest[hip],
            rest[knee],
            (1.3 * lr, 1.3 * lr),
            0.0,
        );
        tube(
            &format!("{side}_shin"),
            BodyRegion::Shin,
            knee,
            Some(knee),
            rest[knee],
            rest[ankle],
            (1.05 * lr, 1.05 * lr),
            0.0,
        );
        let toe = rest[ankle] + Vector3::new(0.0, -0.16, -0.05) * s;
        tube(
            &format!("{side}_foot"),
            BodyRegion::Foot,
            ankle,
            Some(ankle),
            rest[ankle],
            toe,
            (0.85 * lr, 0.85 * lr),
            0.0,
        );
    }
    for (name, region, owner, anchor, center, axis, half_length, radii) in ellipsoids {
        segments.push(Segment {
            name,
            region,
            owner,
            anchor,
            start: center,
            axis,
            length: 0.0,
            radii,
            profile: Profile::Ellipsoid { half_length },
            blend: false,
            limb_chain: None,
            lift: TorsoLift::None,
        });
    }

    // Shape-space bookkeeping per segment.
    let pelvis_z = rest[pelvis].z;
    for seg in &mut segments {
        let side = if seg.name.starts_with("l_") { "l" } else { "r" };
        match seg.region {
            BodyRegion::UpperArm | BodyRegion::Forearm | BodyRegion::Wrist | BodyRegion::Hand => {
                let root = pos(&format!("{side}_shoulder"));
                let dir = (pos(&format!("{side}_elbow")) - root).normalize();
                seg.limb_chain = Some((root, dir));
                seg.lift = TorsoLift::Shift(root.z - pelvis_z);
            }
            BodyRegion::Thigh | BodyRegion::Shin | BodyRegion::Foot => {
                let root = pos(&format!("{side}_hip"));
                let dir = (pos(&format!("{side}_knee")) - root).normalize();
                seg.limb_chain = Some((root, dir));
            }
            BodyRegion::Torso => seg.lift = TorsoLift::Stretch,
            BodyRegion::Neck | BodyRegion::Head => {
                seg.lift = TorsoLift::Shift(pos("neck").z - pelvis_z);
            }
        }
    }

    let mut mesh = MeshBuilder::new(config.ring_segments);
    let mut charts = Vec::new();
    let mut anchors = vec![[0.0; 2]; n];
    let mut anchor_rings: Vec<Option<Vec<usize>>> = vec![None; n];
    let mut packer = ChartPacker::new();
    for (si, seg) in segments.iter().enumerate() {
        let (chart, ring) = mesh.lathe(si, seg, config.ring_spacing, &mut packer)?;
        if let Some(a) = seg.anchor {
            anchors[a] =
                [(chart.surface[0] + chart.surface[2]) / 2.0, chart.surface[1] + ring.1 * TEXTURE_UNITS_PER_METER];
            anchor_rings[a] = Some(ring.0);
        }
        charts.push(chart);
    }

    let joint_regressor: Vec<Vec<(usize, f64)>> = anchor_rings
        .into_iter()
        .enumerate()
        .map(|(joint, ring)| {
            let ring = ring.unwrap_or_else(|| panic!("joint {joint} has no anchor ring"));
            let w = 1.0 / ring.len() as f64;
            ring.into_iter().map(|v| (v, w)).collect()
        })
        .collect();

    let blend_len = 0.05 * s;
    let skin_weights = mesh
        .info
        .iter()
        .map(|info| {
            let seg = &segments[info.segment];
            let parent = parents[seg.owner];
            match parent {
                Some(p) if seg.blend && info.axial < blend_len => {
                    // dyadic weights keep every row sum exactly one
                    let wp = (0.5 * (1.0 - info.axial.max(0.0) / blend_len) * 1024.0).round() / 1024.0;
                    vec![SkinInfluence { joint: seg.owner, weight: 1.0 - wp }, SkinInfluence { joint: p, weight: wp }]
                }
                _ => vec![SkinInfluence { joint: seg.owner, weight: 1.0 }],
            }
        })
        .collect();

    let root = rest[pelvis];
    let mut blendshapes = Vec::with_capacity(config.shape_count);
    for k in 0..config.shape_count {
        let shape = mesh
            .positions
            .iter()
            .zip(&mesh.info)
            .map(|(p, info)| {
                let seg = &segments[info.segment];
                let d = match k {
                    0 => (p - root) * HEIGHT_RATE,
                    1 => (p - info.axis_point) * GIRTH_RATE,
                    2 => match seg.limb_chain {
                        Some((origin, dir)) => dir * ((p - origin).dot(&dir) * LIMB_RATE),
                        None => Vector3::zeros(),
                    },
                    _ => match seg.lift {
                        TorsoLift::None => Vector3::zeros(),
                        TorsoLift::Stretch => Vector3::new(0.0, 0.0, (p.z - pelvis_z) * TORSO_RATE),
                        TorsoLift::Shift(dz) => Vector3::new(0.0, 0.0, dz * TORSO_RATE),
                    },
                };
                [d.x, d.y, d.z]
            })
            .collect();
        blendshapes.push(shape);
    }

    let distal_joints = names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.contains("wrist") || n.contains("hand") || n.contains("ankle"))
        .map(|(i, _)| i)
        .collect();

    let template = AvatarTemplate {
        joint_names: names.iter().map(|s| s.to_string()).collect(),
        parents,
        distal_joints,
        vertices: mesh.positions.iter().map(|p| [p.x, p.y, p.z]).collect(),
        faces: mesh.faces,
        uv_coords: mesh.uvs,
        blendshapes,
        joint_regressor,
        skin_weights,
        atlas: Atlas { charts, joint_anchors: anchors },
    };
    template.validate()?;
    Ok(template)
}

struct ChartPacker {
    column: usize,
    cursor: f64,
}

impl ChartPacker {
    fn new() -> Self {
        ChartPacker { column: 0, cursor: ATLAS_MARGIN }
    }

    fn place(&mut self, height: f64) -> Result<(f64, f64), BodyModelError> {
        let limit = 1.0 - ATLAS_MARGIN;
        if height > limit - ATLAS_MARGIN {
            return Err(BodyModelError::Config("body part too long for the texture atlas".into()));
        }
        if self.cursor + height > limit {
            self.column += 1;
            self.cursor = ATLAS_MARGIN;
        }
        let u0 = ATLAS_MARGIN + self.column as f64 * COLUMN_PITCH;
        if u0 + CHART_WIDTH > limit {
            return Err(BodyModelError::Config("texture atlas is full".into()));
        }
        let v0 = self.cursor;
        self.cursor += height + CHART_GAP;
        Ok((u0, v0))
    }
}

struct MeshBuilder {
    around: usize,
    positions: Vec<Vector3<f64>>,
    info: Vec<VertexInfo>,
    faces: Vec<[usize; 3]>,
    uvs: Vec<[[f64; 2]; 3]>,
}

impl MeshBuilder {
    fn new(around: usize) -> Self {
        MeshBuilder { around, positions: Vec::new(), info: Vec::new(), faces: Vec::new(), uvs: Vec::new() }
    }

    fn push_vertex(&mut self, p: Vector3<f64>, segment: usize, axial: f64, axis_point: Vector3<f64>) -> usize {
        self.positions.push(p);
        self.info.push(VertexInfo { segment, axial, axis_point });
        self.positions.len() - 1
    }

    fn tri(&mut self, idx: [usize; 3], uv: [[f64; 2]; 3]) {
        self.faces.push(idx);
        self.uvs.push(uv);
    }

    /// Emits one body part and its chart. Returns the chart and the anchor
    /// ring (vertex indices, axial offset of the ring from the surface top).
    fn lathe(
        &mut self,
        si: usize,
        seg: &Segment,
        spacing: f64,
        packer: &mut ChartPacker,
    ) -> Result<(Chart, (Vec<usize>, f64)), BodyModelError> {
        let around = self.around;
        // cross-section frame: e1 points to the front of the part
        let front = -Vector3::y();
        let hint = if seg.axis.dot(&front).abs() > 0.9 { Vector3::z() } else { front };
        let e1 = (hint - seg.axis * hint.dot(&seg.axis)).normalize();
        let e2 = seg.axis.cross(&e1);

        // axial stations (offset from start, radius scale)
        let mut stations: Vec<(f64, f64)> = Vec::new();
        let (s_min, s_max, poles, has_caps) = match seg.profile {
            Profile::Tube { extension } => {
                if extension > 0.0 {
                    let k = (extension / spacing).ceil().max(1.0) as usize;
                    for i in 0..k {
                        stations.push((-extension + extension * i as f64 / k as f64, 1.0));
                    }
                }
                let k = (seg.length / spacing).ceil().max(1.0) as usize;
                for i in 0..=k {
                    stations.push((seg.length * i as f64 / k as f64, 1.0));
                }
                (-extension, seg.length, false, true)
            }
            Profile::Ellipsoid { half_length } => {
                let m = (half_length / spacing).ceil().max(2.0) as usize;
                for i in 1..2 * m {
                    let t = -half_length + half_length * i as f64 / m as f64;
                    let t = if i == m { 0.0 } else { t };
                    let rho = (1.0 - (t / half_length).powi(2)).max(0.0).sqrt();
                    stations.push((t, rho));
                }
                (-half_length, half_length, true, false)
            }
        };

        let surf_len = (s_max - s_min) * TEXTURE_UNITS_PER_METER;
        let caps_height = if has_caps { 2.0 * CHART_WIDTH + 2.0 * CAP_GAP } else { 0.0 };
        let height = ANCHOR_PAD + surf_len + ANCHOR_PAD.max(caps_height);
        let (u0, v0) = packer.place(height)?;
        let surface = [u0, v0 + ANCHOR_PAD, u0 + CHART_WIDTH, v0 + ANCHOR_PAD + surf_len];
        let v_of = |t: f64| surface[1] + (t - s_min) * TEXTURE_UNITS_PER_METER;
        let u_of = |k: usize| u0 + CHART_WIDTH * k as f64 / around as f64;

        let mut rings: Vec<Vec<usize>> = Vec::with_capacity(stations.len());
        let mut anchor = None;
        for &(t, rho) in &stations {
            let center = seg.start + seg.axis * t;
            let ring: Vec<usize> = (0..around)
                .map(|k| {
                    let phi = 2.0 * PI * k as f64 / around as f64;
                    let offset = e1 * (seg.radii.0 * rho * phi.cos()) + e2 * (seg.radii.1 * rho * phi.sin());
                    self.push_vertex(center + offset, si, t, center)
                })
                .collect();
            if t == 0.0 {
                anchor = Some((ring.clone(), t - s_min));
            }
            rings.push(ring);
        }
        for w in 0..rings.len() - 1 {
            let (va, vb) = (v_of(stations[w].0), v_of(stations[w + 1].0));
            for k in 0..around {
                let k1 = (k + 1) % around;
                let (a0, a1, b0, b1) = (rings[w][k], rings[w][k1], rings[w + 1][k], rings[w + 1][k1]);
                let (ua, ub) = (u_of(k), u_of(k + 1));
                self.tri([a0, a1, b1], [[ua, va], [ub, va], [ub, vb]]);
                self.tri([a0, b1, b0], [[ua, va], [ub, vb], [ua, vb]]);
            }
        }

        let mut caps = Vec::new();
        let ends = [(s_min, 0usize), (s_max, rings.len() - 1)];
        for (end, &(t, ring_idx)) in ends.iter().enumerate() {
            let center = seg.start + seg.axis * t;
            let ring = rings[ring_idx].clone();
            let v_ring = v_of(stations[ring_idx].0);
            if poles {
                let c = self.push_vertex(center, si, t, center);
                for k in 0..around {
                    let k1 = (k + 1) % around;
                    let um = (u_of(k) + u_of(k + 1)) / 2.0;
                    self.tri([c, ring[k1], ring[k]], [[um, v_of(t)], [u_of(k + 1), v_ring], [u_of(k), v_ring]]);
                }
            } else if has_caps {
                let cv0 = surface[3] + CAP_GAP + end as f64 * (CHART_WIDTH + CAP_GAP);
                let square = [u0, cv0, u0 + CHART_WIDTH, cv0 + CHART_WIDTH];
                let (cu, cv) = (u0 + CHART_WIDTH / 2.0, cv0 + CHART_WIDTH / 2.0);
                let r = 0.45 * CHART_WIDTH;
                let cap_uv = |k: usize| {
                    let phi = 2.0 * PI * k as f64 / around as f64;
                    [cu + r * phi.cos(), cv + r * phi.sin()]
                };
                let c = self.push_vertex(center, si, t, center);
                for k in 0..around {
                    let k1 = (k + 1) % around;
                    self.tri([c, ring[k1], ring[k]], [[cu, cv], cap_uv(k1), cap_uv(k)]);
                }
                caps.push(square);
            }
        }

        let chart = Chart {
            name: seg.name.clone(),
            region: seg.region,
            owner_joint: seg.owner,
            rect: [u0, v0, u0 + CHART_WIDTH, v0 + height],
            surface,
            caps,
        };
        let anchor = anchor.ok_or_else(|| BodyModelError::Config(format!("{} has no joint ring", seg.name)))?;
        Ok((chart, anchor))
    }
}
