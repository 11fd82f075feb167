use super::classes::{is_human, ClassId, HUMAN_CLASSES, SKIN, UNLABELED};
use super::texture::{LabelTexture, TEXTURE_SIZE};
use super::ScanError;
use crate::raster::FrameBuffer;

const CLASSES: usize = HUMAN_CLASSES.len();

/// Per-texel vote counts for each human class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoteGrid {
    counts: Vec<u32>,
}

impl Default for VoteGrid {
    fn default() -> Self {
        VoteGrid::new()
    }
}

impl VoteGrid {
    pub fn new() -> VoteGrid {
        VoteGrid { counts: vec![0; TEXTURE_SIZE * TEXTURE_SIZE * CLASSES] }
    }

    fn slot(x: usize, y: usize, class: ClassId) -> usize {
        (y * TEXTURE_SIZE + x) * CLASSES + (class - SKIN) as usize
    }

    pub fn count(&self, x: usize, y: usize, class: ClassId) -> u32 {
        self.counts[Self::slot(x, y, class)]
    }

    /// Votes of texel `(x, y)` ordered as the human classes.
    pub fn texel_votes(&self, x: usize, y: usize) -> &[u32] {
        let start = (y * TEXTURE_SIZE + x) * CLASSES;
        &self.counts[start..start + CLASSES]
    }

    pub fn texel_total(&self, x: usize, y: usize) -> u32 {
        self.texel_votes(x, y).iter().sum()
    }

    pub fn add(&mut self, x: usize, y: usize, class: ClassId) {
        assert!(is_human(class), "class {class} cannot vote");
        self.counts[Self::slot(x, y, class)] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Element-wise sum.
    pub fn merge(&mut self, other: &VoteGrid) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

/// Casts one vote per foreground pixel whose label is a human class.
/// Returns the number of votes cast.
pub fn scan_view(view: &FrameBuffer, labels: &[ClassId], votes: &mut VoteGrid) -> Result<usize, ScanError> {
    let n = view.pixel_count();
    if labels.len() != n || view.u_q.len() != n || view.v_q.len() != n {
        return Err(ScanError::Dimension(format!("{} labels for a {}x{} view", labels.len(), view.width, view.height)));
    }
    let mut cast = 0;
    for i in 0..n {
        let (u, v) = (view.u_q[i], view.v_q[i]);
        if u == 0 || v == 0 || !is_human(labels[i]) {
            continue;
        }
        votes.add(u as usize - 1, v as usize - 1, labels[i]);
        cast += 1;
    }
    Ok(cast)
}

/// Per-texel argmax; ties go to the smaller class id, empty texels stay
/// unlabeled.
pub fn aggregate_votes(votes: &VoteGrid) -> LabelTexture {
    let mut labels = vec![UNLABELED; TEXTURE_SIZE * TEXTURE_SIZE];
    for y in 0..TEXTURE_SIZE {
        for x in 0..TEXTURE_SIZE {
            let mut best = (0, UNLABELED);
            for (k, &c) in votes.texel_votes(x, y).iter().enumerate() {
                if c > best.0 {
                    best = (c, HUMAN_CLASSES[k]);
                }
            }
            labels[y * TEXTURE_SIZE + x] = best.1;
        }
    }
    LabelTexture::from_labels(labels).expect("human classes only")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scanning::classes::{BACKGROUND, TOP};

    #[test]
    fn ties_and_majorities() {
        let mut g = VoteGrid::new();
        for _ in 0..3 {
            g.add(0, 0, SKIN);
        }
        g.add(0, 0, TOP);
        g.add(1, 0, TOP);
        g.add(1, 0, TOP);
        g.add(1, 0, SKIN);
        g.add(1, 0, SKIN);
        let t = aggregate_votes(&g);
        assert_eq!(t.texel(0, 0), SKIN);
        assert_eq!(t.texel(1, 0), SKIN);
        assert_eq!(t.texel(2, 0), UNLABELED);
    }

    #[test]
    fn single_pixel_vote() {
        let mut view = FrameBuffer::empty(2, 1);
        view.u_q[1] = 11;
        view.v_q[1] = 21;
        let mut g = VoteGrid::new();
        assert_eq!(scan_view(&view, &[SKIN, SKIN], &mut g).unwrap(), 1);
        assert_eq!(g.count(10, 20, SKIN), 1);
        assert_eq!(g.total(), 1);
        assert_eq!(scan_view(&view, &[BACKGROUND, BACKGROUND], &mut g).unwrap(), 0);
        assert!(scan_view(&view, &[SKIN], &mut g).is_err());
    }
}
