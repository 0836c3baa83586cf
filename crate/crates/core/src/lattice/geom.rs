use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Axis direction on the medial lattice, numbered counterclockwise from east.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dir {
    E,
    N,
    W,
    S,
}

pub const DIRS: [Dir; 4] = [Dir::E, Dir::N, Dir::W, Dir::S];

impl Dir {
    pub fn index(self) -> usize {
        match self {
            Dir::E => 0,
            Dir::N => 1,
            Dir::W => 2,
            Dir::S => 3,
        }
    }

    pub fn from_index(i: usize) -> Dir {
        DIRS[i % 4]
    }

    pub fn rev(self) -> Dir {
        Dir::from_index(self.index() + 2)
    }

    pub fn ccw(self) -> Dir {
        Dir::from_index(self.index() + 1)
    }

    pub fn cw(self) -> Dir {
        Dir::from_index(self.index() + 3)
    }

    pub fn step(self) -> (i32, i32) {
        match self {
            Dir::E => (1, 0),
            Dir::N => (0, 1),
            Dir::W => (-1, 0),
            Dir::S => (0, -1),
        }
    }

    /// Direction angle in eighth turns (units of pi/4).
    pub fn angle8(self) -> i32 {
        2 * self.index() as i32
    }

    pub fn parse(s: &str) -> Option<Dir> {
        match s {
            "E" | "e" | "east" => Some(Dir::E),
            "N" | "n" | "north" => Some(Dir::N),
            "W" | "w" | "west" => Some(Dir::W),
            "S" | "s" | "south" => Some(Dir::S),
            _ => None,
        }
    }
}

/// Lower-left corner of the lattice square left of the segment from `p` in direction `d`.
pub fn left_face(p: (i32, i32), d: Dir) -> (i32, i32) {
    let (x, y) = p;
    match d {
        Dir::E => (x, y),
        Dir::N => (x - 1, y),
        Dir::W => (x - 1, y - 1),
        Dir::S => (x, y - 1),
    }
}

pub fn right_face(p: (i32, i32), d: Dir) -> (i32, i32) {
    let (dx, dy) = d.step();
    left_face((p.0 + dx, p.1 + dy), d.rev())
}

/// Square occupying quadrant `q` (0 = NE, 1 = NW, 2 = SW, 3 = SE) around vertex `p`.
pub fn quadrant_face(p: (i32, i32), q: usize) -> (i32, i32) {
    let (x, y) = p;
    match q % 4 {
        0 => (x, y),
        1 => (x - 1, y),
        2 => (x - 1, y - 1),
        _ => (x, y - 1),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Black,
    White,
}

/// Chessboard coloring: the square with lower-left corner (x, y) is black when x + y is even.
pub fn face_color(f: (i32, i32)) -> Color {
    if (f.0 + f.1).rem_euclid(2) == 0 {
        Color::Black
    } else {
        Color::White
    }
}

/// A line through the origin in the complex plane, of the form exp(i pi j / 8) R.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Line(u8);

impl Line {
    pub fn from_eighths(j: i32) -> Line {
        Line(j.rem_euclid(8) as u8)
    }

    /// Line sqrt(conj(tau)) for a unit tangent tau pointing at angle `t8 * pi / 4`.
    pub fn from_tangent(t8: i32) -> Line {
        Line::from_eighths(-t8)
    }

    pub fn eighths(self) -> u8 {
        self.0
    }

    /// Argument in [0, pi).
    pub fn arg(self) -> f64 {
        self.0 as f64 * PI / 8.0
    }

    pub fn unit(self) -> Complex64 {
        Complex64::from_polar(1.0, self.arg())
    }

    /// Whether lambda^k lies on the line, where lambda = exp(-i pi / 8).
    pub fn contains_lambda_power(self, k: i32) -> bool {
        (-k).rem_euclid(8) as u8 == self.0
    }

    /// Orthogonal projection of `z` onto the line.
    pub fn project(self, z: Complex64) -> Complex64 {
        let u = self.unit();
        u * (u.conj() * z).re
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}pi/8", self.0)
    }
}

/// The constant lambda = exp(-i pi / 8).
pub fn lambda() -> Complex64 {
    Complex64::from_polar(1.0, -PI / 8.0)
}

pub fn lambda_pow(k: i32) -> Complex64 {
    Complex64::from_polar(1.0, -PI * k as f64 / 8.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_face_is_across_from_left() {
        let p = (3, -2);
        for d in DIRS {
            let l = left_face(p, d);
            let r = right_face(p, d);
            assert_ne!(l, r);
            assert_ne!(face_color(l), face_color(r));
            assert_eq!(left_face(p, d), right_face((p.0 + d.step().0, p.1 + d.step().1), d.rev()));
        }
    }

    #[test]
    fn horizontal_east_has_lower_left_square_above() {
        assert_eq!(left_face((0, 0), Dir::E), (0, 0));
        assert_eq!(right_face((0, 0), Dir::E), (0, -1));
        assert_eq!(left_face((0, 0), Dir::N), (-1, 0));
        assert_eq!(right_face((0, 0), Dir::N), (0, 0));
    }

    #[test]
    fn edge_lines_match_axis_tangents() {
        assert_eq!(Line::from_tangent(Dir::E.angle8()).arg(), 0.0);
        assert!((Line::from_tangent(Dir::W.angle8()).arg() - PI / 2.0).abs() < 1e-15);
        assert!((Line::from_tangent(Dir::S.angle8()).arg() - PI / 4.0).abs() < 1e-15);
        assert!((Line::from_tangent(Dir::N.angle8()).arg() - 3.0 * PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn lambda_powers_on_own_line() {
        for k in -20..20 {
            let w = lambda_pow(k);
            let l = Line::from_eighths(-k);
            assert!(l.contains_lambda_power(k));
            assert!((l.project(w) - w).norm() < 1e-12);
            assert!(!Line::from_eighths(-k + 1).contains_lambda_power(k));
        }
    }
}
