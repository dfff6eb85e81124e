//! The machine formalism: 1D Turing machines and 2D turmites with
//! instruction-based halting, their canonical integer encoding, and
//! single-step semantics on an unbounded tape.
//!
//! Every (state, read symbol) entry holds one of `m * (moves * n + 1)`
//! instructions. Codes `0..m` are `Halt { write: code }`; codes `m..` are
//! `Step` instructions enumerated in (write, move, next_state) lexicographic
//! order. A rule index is the base-`instructions_per_entry` number whose
//! digit `k` (weight `base^k`) is the code of entry `k`, entries ordered
//! state-major, symbol-minor. This order is frozen: published tables and
//! images depend on it.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::output::OutputObject;

/// Hard cap on step budgets.
pub const MAX_BUDGET: u64 = 1_000_000_000;

/// Symbols are written as single digits in every text format.
pub const MAX_SYMBOLS: u32 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dimension {
    OneD,
    TwoD,
}

impl Dimension {
    pub fn moves(self) -> u32 {
        match self {
            Dimension::OneD => 2,
            Dimension::TwoD => 4,
        }
    }

    /// 1 or 2.
    pub fn rank(self) -> u32 {
        match self {
            Dimension::OneD => 1,
            Dimension::TwoD => 2,
        }
    }

    pub fn from_rank(rank: u32) -> Result<Self> {
        match rank {
            1 => Ok(Dimension::OneD),
            2 => Ok(Dimension::TwoD),
            _ => Err(Error::Unsupported(format!("{rank}-dimensional tapes"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MachineSpace {
    states: u32,
    symbols: u32,
    dimension: Dimension,
}

impl MachineSpace {
    pub fn new(states: u32, symbols: u32, dimension: Dimension) -> Result<Self> {
        if states == 0 {
            return Err(Error::Validation("a machine needs at least one state".into()));
        }
        if symbols < 2 {
            return Err(Error::Validation("a machine needs at least two symbols".into()));
        }
        if symbols > MAX_SYMBOLS {
            return Err(Error::Unsupported(format!(
                "{symbols} symbols (at most {MAX_SYMBOLS})"
            )));
        }
        if states > 255 {
            return Err(Error::Unsupported(format!("{states} states (at most 255)")));
        }
        Ok(MachineSpace {
            states,
            symbols,
            dimension,
        })
    }

    pub fn one_d(states: u32, symbols: u32) -> Result<Self> {
        Self::new(states, symbols, Dimension::OneD)
    }

    pub fn two_d(states: u32, symbols: u32) -> Result<Self> {
        Self::new(states, symbols, Dimension::TwoD)
    }

    pub fn states(&self) -> u32 {
        self.states
    }

    pub fn symbols(&self) -> u32 {
        self.symbols
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    /// Number of (state, symbol) entries in a transition table.
    pub fn entries(&self) -> usize {
        (self.states * self.symbols) as usize
    }

    pub fn instructions_per_entry(&self) -> u64 {
        u64::from(self.symbols) * (u64::from(self.dimension.moves()) * u64::from(self.states) + 1)
    }

    /// `instructions_per_entry ^ (n * m)`, or an unsupported-space error
    /// when that does not fit in 128 bits.
    pub fn space_size(&self) -> Result<u128> {
        u128::from(self.instructions_per_entry())
            .checked_pow(self.entries() as u32)
            .ok_or_else(|| Error::Unsupported(format!("space {self} has more than 2^128 rules")))
    }
}

impl fmt::Display for MachineSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{}D)", self.states, self.symbols, self.dimension.rank())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
    Up,
    Down,
}

impl Move {
    /// Moves in code order: Left, Right for 1D; Up, Down, Left, Right for 2D.
    pub fn all(dim: Dimension) -> &'static [Move] {
        match dim {
            Dimension::OneD => &[Move::Left, Move::Right],
            Dimension::TwoD => &[Move::Up, Move::Down, Move::Left, Move::Right],
        }
    }

    fn code(self, dim: Dimension) -> Option<u64> {
        Move::all(dim).iter().position(|&m| m == self).map(|p| p as u64)
    }

    /// (dx, dy) with rows growing downwards.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Move::Left => (-1, 0),
            Move::Right => (1, 0),
            Move::Up => (0, -1),
            Move::Down => (0, 1),
        }
    }

    pub fn mirrored(self) -> Move {
        match self {
            Move::Left => Move::Right,
            Move::Right => Move::Left,
            other => other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Instruction {
    Halt { write: u8 },
    Step { write: u8, movement: Move, next_state: u32 },
}

impl Instruction {
    pub fn write(&self) -> u8 {
        match *self {
            Instruction::Halt { write } | Instruction::Step { write, .. } => write,
        }
    }

    pub fn from_code(code: u64, space: &MachineSpace) -> Result<Instruction> {
        let m = u64::from(space.symbols);
        let n = u64::from(space.states);
        let moves = u64::from(space.dimension.moves());
        if code >= space.instructions_per_entry() {
            return Err(Error::range(
                "instruction code",
                code,
                0,
                space.instructions_per_entry(),
            ));
        }
        if code < m {
            return Ok(Instruction::Halt { write: code as u8 });
        }
        let c = code - m;
        Ok(Instruction::Step {
            write: (c / (moves * n)) as u8,
            movement: Move::all(space.dimension)[((c / n) % moves) as usize],
            next_state: (c % n) as u32,
        })
    }

    pub fn code(&self, space: &MachineSpace) -> Result<u64> {
        let m = u64::from(space.symbols);
        let n = u64::from(space.states);
        let moves = u64::from(space.dimension.moves());
        if u32::from(self.write()) >= space.symbols {
            return Err(Error::Validation(format!(
                "instruction writes symbol {} in a {}-symbol space",
                self.write(),
                space.symbols
            )));
        }
        match *self {
            Instruction::Halt { write } => Ok(u64::from(write)),
            Instruction::Step {
                write,
                movement,
                next_state,
            } => {
                let mv = movement.code(space.dimension).ok_or_else(|| {
                    Error::Validation(format!("move {movement:?} in a {}D space", space.dimension.rank()))
                })?;
                if next_state >= space.states {
                    return Err(Error::Validation(format!(
                        "next state {next_state} in a {}-state space",
                        space.states
                    )));
                }
                Ok(m + u64::from(write) * moves * n + mv * n + u64::from(next_state))
            }
        }
    }
}

/// A total transition table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MachineRule {
    space: MachineSpace,
    table: Vec<Instruction>,
}

impl MachineRule {
    /// Validates totality and every instruction against the space.
    pub fn new(space: MachineSpace, table: Vec<Instruction>) -> Result<Self> {
        if table.len() != space.entries() {
            return Err(Error::Validation(format!(
                "transition table has {} entries, space {space} needs {}",
                table.len(),
                space.entries()
            )));
        }
        for ins in &table {
            ins.code(&space)?;
        }
        Ok(MachineRule { space, table })
    }

    pub fn decode(index: u128, space: &MachineSpace) -> Result<Self> {
        let size = space.space_size()?;
        if index >= size {
            return Err(Error::range("rule index", index, 0, size));
        }
        let base = space.instructions_per_entry();
        let mut table = Vec::with_capacity(space.entries());
        if let Ok(mut rest) = u64::try_from(index) {
            for _ in 0..space.entries() {
                table.push(Instruction::from_code(rest % base, space)?);
                rest /= base;
            }
        } else {
            let mut rest = index;
            for _ in 0..space.entries() {
                table.push(Instruction::from_code((rest % u128::from(base)) as u64, space)?);
                rest /= u128::from(base);
            }
        }
        Ok(MachineRule { space: *space, table })
    }

    pub fn encode(&self) -> Result<u128> {
        let base = u128::from(self.space.instructions_per_entry());
        let mut index: u128 = 0;
        for ins in self.table.iter().rev() {
            index = index * base + u128::from(ins.code(&self.space)?);
        }
        Ok(index)
    }

    pub fn space(&self) -> &MachineSpace {
        &self.space
    }

    pub fn table(&self) -> &[Instruction] {
        &self.table
    }

    pub fn instruction(&self, state: u32, symbol: u8) -> Instruction {
        self.table[(state * self.space.symbols + u32::from(symbol)) as usize]
    }

    /// Swap symbols 0 and 1 everywhere, reads included. Binary spaces only.
    pub fn complement(&self) -> Result<MachineRule> {
        if self.space.symbols != 2 {
            return Err(Error::Unsupported(
                "symbol complement is defined for binary alphabets only".into(),
            ));
        }
        let flip = |ins: Instruction| match ins {
            Instruction::Halt { write } => Instruction::Halt { write: 1 - write },
            Instruction::Step {
                write,
                movement,
                next_state,
            } => Instruction::Step {
                write: 1 - write,
                movement,
                next_state,
            },
        };
        let table = (0..self.space.states as usize)
            .flat_map(|s| [flip(self.table[2 * s + 1]), flip(self.table[2 * s])])
            .collect();
        Ok(MachineRule {
            space: self.space,
            table,
        })
    }

    /// Swap Left and Right moves.
    pub fn mirror(&self) -> MachineRule {
        let table = self
            .table
            .iter()
            .map(|&ins| match ins {
                Instruction::Step {
                    write,
                    movement,
                    next_state,
                } => Instruction::Step {
                    write,
                    movement: movement.mirrored(),
                    next_state,
                },
                halt => halt,
            })
            .collect();
        MachineRule {
            space: self.space,
            table,
        }
    }
}

pub fn decode_rule(index: u128, space: &MachineSpace) -> Result<MachineRule> {
    MachineRule::decode(index, space)
}

pub fn encode_rule(rule: &MachineRule) -> Result<u128> {
    rule.encode()
}

/// Validated step budget in `1..=MAX_BUDGET`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Budget(u64);

impl Budget {
    pub fn new(steps: u64) -> Result<Self> {
        if steps == 0 || steps > MAX_BUDGET {
            return Err(Error::range("step budget", steps, 1, MAX_BUDGET + 1));
        }
        Ok(Budget(steps))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl TryFrom<u64> for Budget {
    type Error = Error;
    fn try_from(v: u64) -> Result<Self> {
        Budget::new(v)
    }
}

impl From<Budget> for u64 {
    fn from(b: Budget) -> u64 {
        b.0
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Head position; `y` stays 0 on 1D tapes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Pos {
    pub x: i64,
    pub y: i64,
}

/// Full machine state over a sparse, unbounded tape. Cells not stored hold
/// the fill symbol (the blank, 0, unless a filled tape was requested).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Configuration {
    pub state: u32,
    pub head: Pos,
    tape: HashMap<Pos, u8>,
    fill: u8,
    min: Pos,
    max: Pos,
    pub steps: u64,
}

impl Configuration {
    /// State 0, head at the origin, blank tape.
    pub fn initial() -> Self {
        Self::filled(0)
    }

    /// Like [`Configuration::initial`] on a tape pre-filled with `fill`.
    pub fn filled(fill: u8) -> Self {
        Configuration {
            state: 0,
            head: Pos::default(),
            tape: HashMap::new(),
            fill,
            min: Pos::default(),
            max: Pos::default(),
            steps: 0,
        }
    }

    pub fn read(&self, p: Pos) -> u8 {
        self.tape.get(&p).copied().unwrap_or(self.fill)
    }

    fn write(&mut self, p: Pos, v: u8) {
        if v == self.fill {
            self.tape.remove(&p);
        } else {
            self.tape.insert(p, v);
        }
    }

    /// Cells holding something other than the fill symbol.
    pub fn stored_cells(&self) -> usize {
        self.tape.len()
    }

    /// Inclusive bounds of every head position so far.
    pub fn visited_bounds(&self) -> (Pos, Pos) {
        (self.min, self.max)
    }

    /// Symbols over the visited interval (1D) or bounding box (2D), row-major.
    pub fn output(&self, dim: Dimension) -> OutputObject {
        match dim {
            Dimension::OneD => OutputObject::Tape(
                (self.min.x..=self.max.x)
                    .map(|x| self.read(Pos { x, y: 0 }))
                    .collect(),
            ),
            Dimension::TwoD => {
                let rows = (self.max.y - self.min.y + 1) as usize;
                let cols = (self.max.x - self.min.x + 1) as usize;
                let mut cells = Vec::with_capacity(rows * cols);
                for y in self.min.y..=self.max.y {
                    for x in self.min.x..=self.max.x {
                        cells.push(self.read(Pos { x, y }));
                    }
                }
                OutputObject::Array(Grid::from_cells(rows, cols, cells).expect("box dimensions"))
            }
        }
    }

    /// Execute one instruction in place. Returns `true` if it was a halt.
    pub fn advance(&mut self, rule: &MachineRule) -> bool {
        let ins = rule.instruction(self.state, self.read(self.head));
        self.steps += 1;
        match ins {
            Instruction::Halt { write } => {
                self.write(self.head, write);
                true
            }
            Instruction::Step {
                write,
                movement,
                next_state,
            } => {
                self.write(self.head, write);
                let (dx, dy) = movement.delta();
                self.head.x += dx;
                self.head.y += dy;
                self.min.x = self.min.x.min(self.head.x);
                self.min.y = self.min.y.min(self.head.y);
                self.max.x = self.max.x.max(self.head.x);
                self.max.y = self.max.y.max(self.head.y);
                self.state = next_state;
                false
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepResult {
    Running(Configuration),
    Halted(Configuration),
}

pub fn step(mut config: Configuration, rule: &MachineRule) -> StepResult {
    if config.advance(rule) {
        StepResult::Halted(config)
    } else {
        StepResult::Running(config)
    }
}
