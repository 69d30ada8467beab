use std::path::Path;

use super::container::{ArrayContainer, ArrayData, ArrayEntry};
use super::{read_bytes, write_bytes};
use crate::error::{Result, TerrainError};
use crate::obstacles::{Obstacle, OBSTACLE_PARAMS};

/// Text form: one `- position: [x, y]` record per obstacle followed by the
/// five scalar fields in fixed order, each on its own indented line.
pub fn obstacles_text(obs: &[Obstacle]) -> String {
    let mut s = format!("# obstacles: {}\n", obs.len());
    for o in obs {
        s += &format!("- position: [{:?}, {:?}]\n", o.position.0, o.position.1);
        for (name, v) in OBSTACLE_PARAMS.iter().zip(scalars(o)) {
            s += &format!("  {name}: {v:?}\n");
        }
    }
    s
}

fn scalars(o: &Obstacle) -> [f64; 5] {
    [o.height, o.width, o.aspect, o.yaw_deg, o.pitch_deg]
}

pub fn parse_obstacles_text(text: &str, path: &Path) -> Result<Vec<Obstacle>> {
    let bad = |line: usize, why: String| TerrainError::format(path, format!("line {line}: {why}"));
    let num = |line: usize, s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(line, format!("`{}` is not a number", s.trim())))
    };
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim_end()))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < lines.len() {
        let (ln, l) = lines[k];
        let rest = l
            .strip_prefix("- position:")
            .ok_or_else(|| bad(ln, "expected `- position: [x, y]`".into()))?
            .trim();
        let inner = rest
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| bad(ln, "position must be `[x, y]`".into()))?;
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 2 {
            return Err(bad(ln, "position needs two components".into()));
        }
        let position = (num(ln, parts[0])?, num(ln, parts[1])?);
        let mut vals = [0.0; 5];
        for (f, name) in OBSTACLE_PARAMS.iter().enumerate() {
            k += 1;
            let (ln, l) = *lines
                .get(k)
                .ok_or_else(|| bad(ln, format!("record ends before `{name}`")))?;
            let v = l
                .trim()
                .strip_prefix(name)
                .and_then(|r| r.strip_prefix(':'))
                .ok_or_else(|| bad(ln, format!("expected field `{name}`")))?;
            vals[f] = num(ln, v)?;
        }
        let o = Obstacle::new(position, vals[0], vals[1], vals[2], vals[3], vals[4])
            .map_err(|e| bad(ln, e.to_string()))?;
        out.push(o);
        k += 1;
    }
    Ok(out)
}

pub fn obstacles_to_container(obs: &[Obstacle]) -> ArrayContainer {
    let mut c = ArrayContainer::new();
    let pos: Vec<f64> = obs.iter().flat_map(|o| [o.position.0, o.position.1]).collect();
    c.push(ArrayEntry {
        name: "position".into(),
        shape: vec![obs.len(), 2],
        data: ArrayData::F64(pos),
    })
    .expect("fresh container");
    for (f, name) in OBSTACLE_PARAMS.iter().enumerate() {
        let values = obs.iter().map(|o| scalars(o)[f]).collect();
        c.push(ArrayEntry::vector(*name, values)).expect("unique names");
    }
    c
}

pub fn obstacles_from_container(c: &ArrayContainer, path: &Path) -> Result<Vec<Obstacle>> {
    let field = |name: &str| {
        c.get(name)
            .map(|e| e.data.to_f64())
            .ok_or_else(|| TerrainError::format(path, format!("missing entry `{name}`")))
    };
    let pos = field("position")?;
    let n = pos.len() / 2;
    let cols: Vec<Vec<f64>> = OBSTACLE_PARAMS.iter().map(|p| field(p)).collect::<Result<_>>()?;
    if pos.len() != 2 * n || cols.iter().any(|c| c.len() != n) {
        return Err(TerrainError::format(path, "obstacle fields have inconsistent lengths"));
    }
    (0..n)
        .map(|k| {
            Obstacle::new(
                (pos[2 * k], pos[2 * k + 1]),
                cols[0][k],
                cols[1][k],
                cols[2][k],
                cols[3][k],
                cols[4][k],
            )
            .map_err(|e| TerrainError::format(path, e.to_string()))
        })
        .collect()
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == super::CONTAINER_EXTENSION)
}

/// Writes the binary container for `.atdc` paths, text otherwise.
pub fn write_obstacles(path: &Path, obs: &[Obstacle]) -> Result<()> {
    if is_binary(path) {
        obstacles_to_container(obs).write(path)
    } else {
        write_bytes(path, obstacles_text(obs).as_bytes())
    }
}

/// Reads either form, recognizing the binary one by its magic bytes.
pub fn read_obstacles(path: &Path) -> Result<Vec<Obstacle>> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(b"ATDC") {
        obstacles_from_container(&ArrayContainer::decode(&bytes, path)?, path)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| TerrainError::format(path, "obstacle file is not UTF-8 text"))?;
        parse_obstacles_text(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Obstacle> {
        vec![
            Obstacle::default(),
            Obstacle::new((-1.25, 3.0e-7), 0.3, 2.0, 1.5, 271.0, 0.1).unwrap(),
        ]
    }

    #[test]
    fn text_round_trip() {
        let obs = sample();
        let text = obstacles_text(&obs);
        assert_eq!(parse_obstacles_text(&text, Path::new("o")).unwrap(), obs);
        assert!(parse_obstacles_text("- position: [1, 2]\n  height: 1\n", Path::new("o")).is_err());
        assert!(parse_obstacles_text("", Path::new("o")).unwrap().is_empty());
    }

    #[test]
    fn container_round_trip() {
        let obs = sample();
        let c = obstacles_to_container(&obs);
        let back = ArrayContainer::decode(&c.encode(), Path::new("o")).unwrap();
        assert_eq!(obstacles_from_container(&back, Path::new("o")).unwrap(), obs);
    }
}
