//! A deliberately non-truthful mechanism used as a negative control for the
//! truthfulness checker. Not for use outside verification runs.

use crate::cost::CostModel;
use crate::error::Result;
use crate::mechanisms::{Allocation, Mechanism, MinCostAuction};

/// Same winners and privacy levels as [`MinCostAuction`], but each winner is
/// paid its own reported cost instead of the first loser's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayYourBid(pub MinCostAuction);

impl Mechanism for PayYourBid {
    fn name(&self) -> &str {
        "pay-your-bid-control"
    }

    fn model(&self) -> CostModel {
        self.0.model
    }

    fn allocate(&self, values: &[f64]) -> Result<Allocation> {
        let mut alloc = self.0.allocate(values)?;
        for &i in alloc.plan.winners() {
            alloc.payments[i] = self.0.model.cost(values[i], alloc.epsilons[i]);
        }
        Ok(alloc)
    }
}
