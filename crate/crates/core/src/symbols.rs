//! Identifiers shared by the memory model, the agents and the world.

use std::fmt;

/// One of the two negotiating agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u8);

impl AgentId {
    pub const A: AgentId = AgentId(0);
    pub const B: AgentId = AgentId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn other(self) -> AgentId {
        AgentId(1 - self.0.min(1))
    }

    pub fn parse(token: &str) -> Option<AgentId> {
        match token {
            "agent-a" => Some(AgentId::A),
            "agent-b" => Some(AgentId::B),
            _ => None,
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "agent-{}", (b'a' + self.0) as char)
    }
}

/// World-unique furniture item id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub u16);

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "item-{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Room {
    One,
    Two,
}

impl Room {
    pub const ALL: [Room; 2] = [Room::One, Room::Two];

    pub fn next(self) -> Option<Room> {
        match self {
            Room::One => Some(Room::Two),
            Room::Two => None,
        }
    }

    pub fn parse(token: &str) -> Option<Room> {
        match token {
            "room-1" => Some(Room::One),
            "room-2" => Some(Room::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Room {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Room::One => f.write_str("room-1"),
            Room::Two => f.write_str("room-2"),
        }
    }
}

/// The domain action: `actor` puts `item` into `room`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PutAct {
    pub actor: AgentId,
    pub item: ItemId,
    pub room: Room,
}
