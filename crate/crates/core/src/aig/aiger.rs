// SPDX-License-Identifier: Apache-2.0

//! AIGER 1.9 reader and writer (combinational subset).

use std::str::FromStr;

use super::{Aig, AigError, AndGate, Lit, Symbol, SymbolKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AigerFormat {
    Ascii,
    Binary,
}

impl AigerFormat {
    /// Format announced by the header magic, if any.
    pub fn detect(bytes: &[u8]) -> Option<AigerFormat> {
        if bytes.starts_with(b"aag ") {
            Some(AigerFormat::Ascii)
        } else if bytes.starts_with(b"aig ") {
            Some(AigerFormat::Binary)
        } else {
            None
        }
    }

    fn magic(self) -> &'static str {
        match self {
            AigerFormat::Ascii => "aag",
            AigerFormat::Binary => "aig",
        }
    }
}

impl FromStr for AigerFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii" | "aag" => Ok(AigerFormat::Ascii),
            "binary" | "aig" => Ok(AigerFormat::Binary),
            _ => Err(format!("unknown AIGER format '{s}'")),
        }
    }
}

struct Header {
    max_var: usize,
    inputs: usize,
    outputs: usize,
    ands: usize,
}

/// Byte cursor over the input with line-oriented helpers.
struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn next_line(&mut self) -> Option<&'a str> {
        if self.pos >= self.bytes.len() {
            return None;
        }
        let rest = &self.bytes[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        self.pos += end + 1;
        self.line += 1;
        let raw = &rest[..end];
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        Some(std::str::from_utf8(raw).unwrap_or(""))
    }

    fn required_line(&mut self) -> Result<&'a str, AigError> {
        self.next_line().ok_or(AigError::Truncated)
    }

    fn byte(&mut self) -> Result<u8, AigError> {
        let b = *self.bytes.get(self.pos).ok_or(AigError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    fn varint(&mut self) -> Result<u32, AigError> {
        let mut x: u64 = 0;
        let mut shift = 0;
        loop {
            let b = self.byte()?;
            x |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                break;
            }
            shift += 7;
            if shift > 35 {
                return Err(AigError::Body {
                    line: self.line,
                    msg: "delta encoding overflow".into(),
                });
            }
        }
        u32::try_from(x).map_err(|_| AigError::Body {
            line: self.line,
            msg: "delta out of range".into(),
        })
    }

    fn body_err(&self, msg: impl Into<String>) -> AigError {
        AigError::Body {
            line: self.line,
            msg: msg.into(),
        }
    }
}

fn parse_header(line: &str, format: AigerFormat) -> Result<Header, AigError> {
    let mut it = line.split_ascii_whitespace();
    let magic = it.next().unwrap_or("");
    if magic != format.magic() {
        return Err(AigError::Header(format!(
            "expected '{}' magic, found '{magic}'",
            format.magic()
        )));
    }
    let nums: Vec<usize> = it
        .map(|t| t.parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| AigError::Header(format!("non-numeric field in '{line}'")))?;
    if nums.len() < 5 {
        return Err(AigError::Header(format!("expected M I L O A in '{line}'")));
    }
    if nums[2] > 0 {
        return Err(AigError::Sequential(nums[2]));
    }
    for (name, &v) in ["bad", "constraint", "justice", "fairness"].iter().zip(&nums[5..]) {
        if v > 0 {
            return Err(AigError::Extension(format!("{v} {name} properties")));
        }
    }
    let h = Header {
        max_var: nums[0],
        inputs: nums[1],
        outputs: nums[3],
        ands: nums[4],
    };
    if h.inputs + h.ands > h.max_var {
        return Err(AigError::Header(format!(
            "M = {} is smaller than I + A = {}",
            h.max_var,
            h.inputs + h.ands
        )));
    }
    Ok(h)
}

fn parse_lit(tok: Option<&str>, cur: &Cursor) -> Result<u32, AigError> {
    tok.ok_or_else(|| cur.body_err("missing literal"))?
        .parse::<u32>()
        .map_err(|_| cur.body_err("bad literal"))
}

/// Parses either format, chosen by the magic word.
pub fn read_aiger(bytes: &[u8]) -> Result<Aig, AigError> {
    let format = AigerFormat::detect(bytes)
        .ok_or_else(|| AigError::Header("expected `aag` or `aig` magic".into()))?;
    parse_aiger(bytes, format)
}

pub fn parse_aiger(bytes: &[u8], format: AigerFormat) -> Result<Aig, AigError> {
    let mut cur = Cursor {
        bytes,
        pos: 0,
        line: 0,
    };
    let header = parse_header(cur.required_line()?, format)?;
    let aig = match format {
        AigerFormat::Ascii => parse_ascii_body(&mut cur, &header)?,
        AigerFormat::Binary => parse_binary_body(&mut cur, &header)?,
    };
    let (symbols, comment) = parse_symbols(&mut cur, &aig)?;
    Ok(aig.with_symbols(symbols, comment))
}

fn parse_ascii_body(cur: &mut Cursor, h: &Header) -> Result<Aig, AigError> {
    // Variable index -> definition.
    #[derive(Clone, Copy)]
    enum Def {
        Undefined,
        Input(usize),
        Gate(u32, u32),
    }
    let mut defs = vec![Def::Undefined; h.max_var + 1];
    for i in 0..h.inputs {
        let line = cur.required_line()?;
        let lit = parse_lit(line.split_ascii_whitespace().next(), cur)?;
        let var = (lit >> 1) as usize;
        if lit & 1 == 1 || var == 0 || var > h.max_var || !matches!(defs[var], Def::Undefined) {
            return Err(cur.body_err(format!("invalid input literal {lit}")));
        }
        defs[var] = Def::Input(i);
    }
    let mut outputs_raw = Vec::with_capacity(h.outputs);
    for _ in 0..h.outputs {
        let line = cur.required_line()?;
        outputs_raw.push(parse_lit(line.split_ascii_whitespace().next(), cur)?);
    }
    let mut gate_vars = Vec::with_capacity(h.ands);
    for _ in 0..h.ands {
        let line = cur.required_line()?;
        let mut it = line.split_ascii_whitespace();
        let lhs = parse_lit(it.next(), cur)?;
        let r0 = parse_lit(it.next(), cur)?;
        let r1 = parse_lit(it.next(), cur)?;
        let var = (lhs >> 1) as usize;
        if lhs & 1 == 1 || var == 0 || var > h.max_var || !matches!(defs[var], Def::Undefined) {
            return Err(cur.body_err(format!("invalid and-gate literal {lhs}")));
        }
        defs[var] = Def::Gate(r0, r1);
        gate_vars.push(var);
    }

    // Renumber densely in topological order (file order when already sorted).
    let check = |lit: u32| -> Result<usize, AigError> {
        let var = (lit >> 1) as usize;
        if var > h.max_var || (var != 0 && matches!(defs[var], Def::Undefined)) {
            Err(AigError::Dangling(lit))
        } else {
            Ok(var)
        }
    };
    let mut map: Vec<Option<Lit>> = vec![None; h.max_var + 1];
    map[0] = Some(Lit::FALSE);
    for var in 1..=h.max_var {
        if let Def::Input(i) = defs[var] {
            map[var] = Some(Lit::new(1 + i, false));
        }
    }
    let mut ands: Vec<AndGate> = Vec::with_capacity(h.ands);
    let mut on_stack = vec![false; h.max_var + 1];
    for &root in &gate_vars {
        if map[root].is_some() {
            continue;
        }
        let mut stack = vec![(root, false)];
        while let Some((var, expanded)) = stack.pop() {
            if map[var].is_some() {
                continue;
            }
            let Def::Gate(r0, r1) = defs[var] else { unreachable!() };
            if expanded {
                let f0 = map[check(r0)?].unwrap().xor_if(r0 & 1 == 1);
                let f1 = map[check(r1)?].unwrap().xor_if(r1 & 1 == 1);
                map[var] = Some(Lit::new(1 + h.inputs + ands.len(), false));
                ands.push(AndGate { fanin0: f0, fanin1: f1 });
                on_stack[var] = false;
                continue;
            }
            if on_stack[var] {
                return Err(AigError::Cycle);
            }
            on_stack[var] = true;
            stack.push((var, true));
            for r in [r1, r0] {
                let v = check(r)?;
                if map[v].is_none() {
                    if on_stack[v] {
                        return Err(AigError::Cycle);
                    }
                    stack.push((v, false));
                }
            }
        }
    }
    let outputs = outputs_raw
        .iter()
        .map(|&o| Ok(map[check(o)?].unwrap().xor_if(o & 1 == 1)))
        .collect::<Result<Vec<_>, AigError>>()?;
    Aig::from_parts(h.inputs, ands, outputs)
}

fn parse_binary_body(cur: &mut Cursor, h: &Header) -> Result<Aig, AigError> {
    if h.max_var != h.inputs + h.ands {
        return Err(AigError::Header(format!(
            "binary AIGER requires M = I + A, got M = {}",
            h.max_var
        )));
    }
    let mut outputs = Vec::with_capacity(h.outputs);
    for _ in 0..h.outputs {
        let line = cur.required_line()?;
        let lit = parse_lit(line.split_ascii_whitespace().next(), cur)?;
        if (lit >> 1) as usize > h.max_var {
            return Err(AigError::Dangling(lit));
        }
        outputs.push(Lit::from_raw(lit));
    }
    let mut ands = Vec::with_capacity(h.ands);
    for i in 0..h.ands {
        let lhs = 2 * (h.inputs + i + 1) as u32;
        let d0 = cur.varint()?;
        let d1 = cur.varint()?;
        if d0 == 0 || d0 > lhs || d1 > lhs - d0 {
            return Err(cur.body_err(format!("invalid delta encoding for gate {lhs}")));
        }
        let r0 = lhs - d0;
        let r1 = r0 - d1;
        ands.push(AndGate {
            fanin0: Lit::from_raw(r1),
            fanin1: Lit::from_raw(r0),
        });
    }
    Aig::from_parts(h.inputs, ands, outputs)
}

fn parse_symbols(cur: &mut Cursor, aig: &Aig) -> Result<(Vec<Symbol>, Option<String>), AigError> {
    let mut symbols = Vec::new();
    while let Some(line) = cur.next_line() {
        if line == "c" {
            let rest = &cur.bytes[cur.pos.min(cur.bytes.len())..];
            let text = String::from_utf8_lossy(rest).into_owned();
            return Ok((symbols, Some(text)));
        }
        if line.is_empty() {
            continue;
        }
        let (kind, limit) = match line.as_bytes()[0] {
            b'i' => (SymbolKind::Input, aig.num_inputs()),
            b'o' => (SymbolKind::Output, aig.num_outputs()),
            _ => return Err(cur.body_err(format!("unexpected line '{line}'"))),
        };
        let (idx, name) = line[1..]
            .split_once(' ')
            .ok_or_else(|| cur.body_err("malformed symbol"))?;
        let index: usize = idx.parse().map_err(|_| cur.body_err("malformed symbol index"))?;
        if index >= limit {
            return Err(cur.body_err(format!("symbol index {index} out of range")));
        }
        symbols.push(Symbol {
            kind,
            index,
            name: name.to_string(),
        });
    }
    Ok((symbols, None))
}

fn push_varint(out: &mut Vec<u8>, mut x: u32) {
    while x >= 0x80 {
        out.push((x & 0x7f) as u8 | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}

pub fn write_aiger(aig: &Aig, format: AigerFormat) -> Vec<u8> {
    let mut out = Vec::new();
    let max_var = aig.num_inputs() + aig.num_ands();
    out.extend_from_slice(
        format!(
            "{} {} {} 0 {} {}\n",
            format.magic(),
            max_var,
            aig.num_inputs(),
            aig.num_outputs(),
            aig.num_ands()
        )
        .as_bytes(),
    );
    if format == AigerFormat::Ascii {
        for i in 0..aig.num_inputs() {
            out.extend_from_slice(format!("{}\n", aig.input(i)).as_bytes());
        }
    }
    for o in aig.outputs() {
        out.extend_from_slice(format!("{o}\n").as_bytes());
    }
    let first = aig.first_and();
    for (k, g) in aig.ands().iter().enumerate() {
        let lhs = Lit::new(first + k, false);
        match format {
            AigerFormat::Ascii => {
                out.extend_from_slice(format!("{} {} {}\n", lhs, g.fanin0, g.fanin1).as_bytes())
            }
            AigerFormat::Binary => {
                let (hi, lo) = if g.fanin0 > g.fanin1 {
                    (g.fanin0, g.fanin1)
                } else {
                    (g.fanin1, g.fanin0)
                };
                push_varint(&mut out, lhs.raw() - hi.raw());
                push_varint(&mut out, hi.raw() - lo.raw());
            }
        }
    }
    for s in aig.symbols() {
        let tag = match s.kind {
            SymbolKind::Input => 'i',
            SymbolKind::Output => 'o',
        };
        out.extend_from_slice(format!("{tag}{} {}\n", s.index, s.name).as_bytes());
    }
    if let Some(c) = aig.comment() {
        out.extend_from_slice(b"c\n");
        out.extend_from_slice(c.as_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::simulate;

    #[test]
    fn parses_single_and() {
        let aig = parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n", AigerFormat::Ascii).unwrap();
        assert_eq!(aig.num_inputs(), 2);
        assert_eq!(aig.num_ands(), 1);
        assert_eq!(aig.outputs(), &[Lit::new(3, false)]);
        let out = simulate(&aig, &[vec![0b1100], vec![0b1010]]).unwrap();
        assert_eq!(out[0][0], 0b1000);
        assert_eq!(
            write_aiger(&aig, AigerFormat::Ascii),
            b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n".to_vec()
        );
    }

    #[test]
    fn parses_inverter() {
        let aig = parse_aiger(b"aag 1 1 0 1 0\n2\n3\n", AigerFormat::Ascii).unwrap();
        assert_eq!(aig.outputs(), &[Lit::new(1, true)]);
        let out = simulate(&aig, &[vec![0b01]]).unwrap();
        assert_eq!(out[0][0] & 0b11, 0b10);
    }

    #[test]
    fn writes_wire() {
        let aig = Aig::from_parts(1, vec![], vec![Lit::new(1, false)]).unwrap();
        assert_eq!(write_aiger(&aig, AigerFormat::Ascii), b"aag 1 1 0 1 0\n2\n2\n".to_vec());
    }

    #[test]
    fn rejects_latches_and_dangling() {
        assert!(matches!(
            parse_aiger(b"aag 2 1 1 1 0\n2\n4 2\n4\n", AigerFormat::Ascii),
            Err(AigError::Sequential(1))
        ));
        assert!(matches!(
            parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 8\n", AigerFormat::Ascii),
            Err(AigError::Dangling(_)) | Err(AigError::Body { .. })
        ));
        assert!(matches!(
            parse_aiger(b"aag 3 2 0 1 0\n2\n4\n6\n", AigerFormat::Ascii),
            Err(AigError::Dangling(6))
        ));
        assert!(matches!(
            parse_aiger(b"aig 3 2 0 1 1\n6\n", AigerFormat::Binary),
            Err(AigError::Truncated)
        ));
        assert!(parse_aiger(b"aag 3 2\n", AigerFormat::Ascii).is_err());
        assert!(parse_aiger(b"aag 1 1 0 1 0\n2\n3\n", AigerFormat::Binary).is_err());
    }

    #[test]
    fn reorders_unsorted_ascii() {
        // Gate 8 references gate 6 which is defined later in the file.
        let src = b"aag 4 2 0 1 2\n2\n4\n8\n8 6 2\n6 2 4\n";
        let aig = parse_aiger(src, AigerFormat::Ascii).unwrap();
        let out = simulate(&aig, &[vec![0b1100], vec![0b1010]]).unwrap();
        assert_eq!(out[0][0] & 0xf, 0b1000);
        assert!(matches!(
            parse_aiger(b"aag 4 2 0 1 2\n2\n4\n8\n8 6 2\n6 8 4\n", AigerFormat::Ascii),
            Err(AigError::Cycle)
        ));
    }

    #[test]
    fn keeps_symbols() {
        let src = b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\ni0 a\ni1 b\no0 y\nc\nhello\n";
        let aig = parse_aiger(src, AigerFormat::Ascii).unwrap();
        assert_eq!(aig.symbols().len(), 3);
        assert_eq!(write_aiger(&aig, AigerFormat::Ascii), src.to_vec());
        let bin = write_aiger(&aig, AigerFormat::Binary);
        let back = parse_aiger(&bin, AigerFormat::Binary).unwrap();
        assert_eq!(back.symbols(), aig.symbols());
        assert_eq!(write_aiger(&back, AigerFormat::Binary), bin);
    }
}
