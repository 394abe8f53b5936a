use crate::roles::RoleLabel;

pub fn role_color(role: RoleLabel) -> &'static str {
    match role {
        RoleLabel::ComprehensiveContributor => "#1b9e77",
        RoleLabel::SpecializedContributor => "#7570b3",
        RoleLabel::VersatileParticipant => "#d95f02",
        RoleLabel::FreeRider => "#757575",
    }
}

const TYPE_PALETTE: [&str; 6] = ["#a6cee3", "#b2df8a", "#fdbf6f", "#cab2d6", "#fb9a99", "#ffff99"];

pub fn type_color(index: usize) -> &'static str {
    TYPE_PALETTE[index % TYPE_PALETTE.len()]
}
