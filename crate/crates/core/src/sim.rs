//! The simulation run: wires demand, planning, release, the shop floor and
//! cost accounting onto the event calendar.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::controllers::{
    Controller, ControllerParams, DemandBook, LoopId, LoopStates, OrderFactory, OrderId,
    PlanningInput, Ppcs, ProductionOrder, ScheduledReceipt, StockState,
};
use crate::costing::{finalize, CostCategory, CostLedger, Diagnostics, RunResult};
use crate::demand::{CustomerOrder, DeliveryBook, DemandGenerator};
use crate::engine::{EventQueue, Phased};
use crate::error::{Result, SimError};
use crate::model::{CalibratedScenario, Scenario, SkuKind};
use crate::shop::{DispatchRule, Job, Machine, OperationTimes, QueueEntry};
use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    PeriodStart,
    OrderArrival,
    PlanningRun,
    ReleaseCheck,
    MachineFinish(usize),
    DueDate(u64),
    CostSampling,
    HorizonEnd,
}

impl Phased for EventKind {
    fn phase(&self) -> u8 {
        match self {
            EventKind::PeriodStart => 0,
            EventKind::OrderArrival => 1,
            EventKind::PlanningRun => 2,
            EventKind::ReleaseCheck => 3,
            EventKind::MachineFinish(_) => 4,
            EventKind::DueDate(_) => 5,
            EventKind::CostSampling => 6,
            EventKind::HorizonEnd => 7,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Check the state invariants after every event.
    pub audit: bool,
    /// Collect order, machine, planning and customer traces.
    pub trace: bool,
    /// Overrides the dispatch rule (FISFO for ConWIP, FIFO otherwise).
    pub dispatch: Option<DispatchRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderTraceRow {
    pub order: u64,
    pub sku: u32,
    pub quantity: f64,
    pub created_day: u32,
    pub planned_start_day: i64,
    pub planned_end_day: i64,
    pub loop_id: Option<LoopId>,
    pub workload_minutes: f64,
    pub released: Option<f64>,
    pub completed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineTraceRow {
    pub machine: String,
    pub order: u64,
    pub sku: u32,
    pub start: f64,
    pub setup: f64,
    pub proc: f64,
    pub finish: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningTraceRow {
    pub day: u32,
    pub sku: u32,
    pub on_hand: f64,
    pub scheduled_receipts: f64,
    pub backorders: f64,
    pub inventory_position: f64,
    pub new_orders: usize,
    pub new_quantity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomerTraceRow {
    pub order: u64,
    pub item: u32,
    pub arrival_day: u32,
    pub quantity: f64,
    pub due_day: f64,
    pub delivered_day: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub orders: Vec<OrderTraceRow>,
    pub machines: Vec<MachineTraceRow>,
    pub planning: Vec<PlanningTraceRow>,
    pub customers: Vec<CustomerTraceRow>,
}

impl Trace {
    /// Writes `orders.csv`, `machines.csv`, `planning.csv` and `customers.csv`.
    pub fn write_csv(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_rows(&dir.join("orders.csv"), &self.orders)?;
        write_rows(&dir.join("machines.csv"), &self.machines)?;
        write_rows(&dir.join("planning.csv"), &self.planning)?;
        write_rows(&dir.join("customers.csv"), &self.customers)?;
        Ok(())
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub result: RunResult,
    pub period_starts: u64,
    pub trace: Option<Trace>,
}

struct OpenCustomer {
    sku: usize,
    order: CustomerOrder,
}

struct World {
    cal: CalibratedScenario,
    options: SimOptions,
    mpd: f64,
    controller: Controller,
    factory: OrderFactory,
    demand: DemandGenerator,
    times: OperationTimes,
    machines: Vec<Machine>,
    item_skus: Vec<usize>,
    /// Created and not completed.
    orders: BTreeMap<OrderId, ProductionOrder>,
    pending: BTreeSet<OrderId>,
    stock: Vec<f64>,
    customers: BTreeMap<u64, OpenCustomer>,
    deliveries: Vec<DeliveryBook>,
    next_customer: u64,
    ledger: CostLedger,
    released_units: Vec<f64>,
    completed_units: Vec<f64>,
    period_starts: u64,
    finished: bool,
    warmup: f64,
    released_in_window: u64,
    item_lead_sum: f64,
    item_lead_count: u64,
    due_in_window: u64,
    on_time_in_window: u64,
    trace: Option<Trace>,
}

fn wip_category(kind: SkuKind) -> CostCategory {
    if kind == SkuKind::Item {
        CostCategory::WipItem
    } else {
        CostCategory::WipComponent
    }
}

fn stock_category(kind: SkuKind) -> CostCategory {
    if kind == SkuKind::Item {
        CostCategory::Fgi
    } else {
        CostCategory::ComponentStock
    }
}

impl World {
    fn days(&self, t: SimTime) -> f64 {
        t.as_days(self.mpd)
    }

    fn handle(&mut self, q: &mut EventQueue<EventKind>, kind: EventKind) -> Result<()> {
        let now = q.now();
        match kind {
            EventKind::PeriodStart => {
                self.period_starts += 1;
                let day = SimTime::day_start(now.day);
                q.schedule(day, EventKind::OrderArrival)?;
                q.schedule(day, EventKind::PlanningRun)?;
                q.schedule(day, EventKind::ReleaseCheck)?;
                if now.day + 1 < self.cal.scenario.horizon_days {
                    q.schedule(SimTime::day_start(now.day + 1), EventKind::PeriodStart)?;
                }
            }
            EventKind::OrderArrival => self.arrivals(q, now)?,
            EventKind::PlanningRun => self.planning(now),
            EventKind::ReleaseCheck => self.release_check(q, now)?,
            EventKind::MachineFinish(m) => self.machine_finish(q, m, now)?,
            EventKind::DueDate(id) => self.due(id, now),
            EventKind::CostSampling => self.ledger.reset_integrals(self.days(now)),
            EventKind::HorizonEnd => {
                self.ledger.advance(self.days(now));
                self.finished = true;
            }
        }
        if self.options.audit {
            self.audit(now)?;
        }
        Ok(())
    }

    fn arrivals(&mut self, q: &mut EventQueue<EventKind>, now: SimTime) -> Result<()> {
        for slot in 0..self.item_skus.len() {
            let id = self.next_customer;
            self.next_customer += 1;
            let order = self.demand.generate_order(id, slot, now.day)?;
            q.schedule(SimTime::from_days(order.due_day, self.mpd), EventKind::DueDate(id))?;
            self.customers.insert(
                id,
                OpenCustomer {
                    sku: self.item_skus[slot],
                    order,
                },
            );
        }
        Ok(())
    }

    fn stock_states(&self) -> Vec<StockState> {
        let cal = &self.cal;
        let mut states: Vec<StockState> = (0..cal.skus.len())
            .map(|sku| StockState {
                on_hand: self.stock[sku],
                scheduled_receipts: Vec::new(),
                backorders: if cal.skus[sku].is_item() {
                    self.deliveries[sku].backlog_units()
                } else {
                    0.0
                },
                safety_stock_abs: self.controller.safety_stock(cal, sku),
            })
            .collect();
        for o in self.orders.values() {
            states[o.sku].scheduled_receipts.push(ScheduledReceipt {
                order: o.id,
                quantity: o.quantity,
                due_day: o.planned_end_day,
            });
        }
        for id in &self.pending {
            let o = &self.orders[id];
            if let Some(c) = cal.skus[o.sku].child.filter(|c| cal.skus[*c].is_planned()) {
                states[c].backorders += o.quantity;
            }
        }
        states
    }

    fn planning(&mut self, now: SimTime) {
        let stock = self.stock_states();
        let mut demand = DemandBook::new(self.cal.skus.len());
        for c in self.customers.values() {
            demand.open[c.sku].push((c.order.due_day, c.order.quantity));
        }
        let pending: Vec<&ProductionOrder> = self.pending.iter().map(|id| &self.orders[id]).collect();
        let input = PlanningInput {
            cal: &self.cal,
            stock: &stock,
            demand: &demand,
            pending: &pending,
            today: now.day,
        };
        let mut new = self.controller.plan(&input, &mut self.factory);
        if self.controller.ppcs() == Ppcs::Mrp {
            // regenerative: only orders due to start are firmed
            new.retain(|o| o.planned_start_day <= now.day as i64);
        }
        if let Some(trace) = &mut self.trace {
            for (sku, s) in stock.iter().enumerate() {
                if !self.cal.skus[sku].is_planned() {
                    continue;
                }
                let mine = new.iter().filter(|o| o.sku == sku);
                trace.planning.push(PlanningTraceRow {
                    day: now.day,
                    sku: self.cal.skus[sku].id.0,
                    on_hand: s.on_hand,
                    scheduled_receipts: s.receipts_total(),
                    backorders: s.backorders,
                    inventory_position: s.inventory_position(),
                    new_orders: mine.clone().count(),
                    new_quantity: mine.map(|o| o.quantity).sum(),
                });
            }
        }
        for o in new {
            self.pending.insert(o.id);
            self.orders.insert(o.id, o);
        }
    }

    fn release_check(&mut self, q: &mut EventQueue<EventKind>, now: SimTime) -> Result<()> {
        if self.pending.is_empty() {
            return Ok(());
        }
        let loops_before = self.controller.loops().copied();
        let mut stock = self.stock.clone();
        let pending: Vec<&ProductionOrder> = self.pending.iter().map(|id| &self.orders[id]).collect();
        let released = self.controller.release(&self.cal, &pending, &mut stock, now.day);
        let t = self.days(now);
        for (sku, (old, new)) in self.stock.iter().zip(&stock).enumerate() {
            if old != new {
                self.ledger.change(t, stock_category(self.cal.skus[sku].kind), new - old);
            }
        }
        self.stock = stock;
        if let Some(mut loops) = loops_before {
            if self.options.audit {
                self.check_cap_discipline(&mut loops, &released, now)?;
            }
        }
        for id in released {
            self.release_order(q, id, now)?;
        }
        Ok(())
    }

    fn check_cap_discipline(&self, loops: &mut LoopStates, released: &[OrderId], now: SimTime) -> Result<()> {
        for id in released {
            let o = &self.orders[id];
            let l = loops.get_mut(o.loop_id.unwrap_or(LoopId::Item));
            if !l.admits() {
                return Err(SimError::Invariant {
                    at: now,
                    what: format!("{id} released with loop WIP {} at cap {}", l.wip, l.cap),
                });
            }
            l.admit(o.workload_minutes);
        }
        Ok(())
    }

    fn release_order(&mut self, q: &mut EventQueue<EventKind>, id: OrderId, now: SimTime) -> Result<()> {
        self.pending.remove(&id);
        let t = self.days(now);
        let o = self.orders.get_mut(&id).expect("released order exists");
        o.released_at = Some(now);
        let (sku, qty) = (o.sku, o.quantity);
        self.ledger.change(t, wip_category(self.cal.skus[sku].kind), qty);
        self.released_units[sku] += qty;
        if t >= self.warmup {
            self.released_in_window += 1;
        }
        let machine = self.cal.skus[sku].routing[0].machine;
        self.machines[machine].enqueue(QueueEntry {
            order: id,
            arrival: now,
            system_entry: now,
        });
        self.start_if_idle(q, machine, now)
    }

    fn start_if_idle(&mut self, q: &mut EventQueue<EventKind>, m: usize, now: SimTime) -> Result<()> {
        if !self.machines[m].is_idle() {
            return Ok(());
        }
        let Some(entry) = self.machines[m].take_next() else {
            return Ok(());
        };
        let o = &self.orders[&entry.order];
        let step = self.cal.skus[o.sku].routing[o.route_position];
        debug_assert_eq!(step.machine, m);
        let (setup, process) = self.times.draw(m, step.unit_minutes, o.quantity)?;
        let finish = now.plus_minutes(setup + process, self.mpd);
        if let Some(trace) = &mut self.trace {
            trace.machines.push(MachineTraceRow {
                machine: self.machines[m].name.clone(),
                order: entry.order.0,
                sku: o.sku_id.0,
                start: now.as_days(self.mpd),
                setup,
                proc: process,
                finish: finish.as_days(self.mpd),
            });
        }
        self.machines[m].start(Job {
            order: entry.order,
            start: now,
            setup_minutes: setup,
            process_minutes: process,
            finish,
        });
        q.schedule(finish, EventKind::MachineFinish(m))?;
        Ok(())
    }

    fn machine_finish(&mut self, q: &mut EventQueue<EventKind>, m: usize, now: SimTime) -> Result<()> {
        let job = self.machines[m].finish().ok_or_else(|| SimError::Invariant {
            at: now,
            what: format!("finish event on idle machine {}", self.cal.machines[m]),
        })?;
        let o = self.orders.get_mut(&job.order).expect("order in process exists");
        o.route_position += 1;
        let routing = &self.cal.skus[o.sku].routing;
        let mut completed = false;
        if o.route_position < routing.len() {
            let next = routing[o.route_position].machine;
            let entry = QueueEntry {
                order: o.id,
                arrival: now,
                system_entry: o.released_at.unwrap_or(now),
            };
            self.machines[next].enqueue(entry);
            self.start_if_idle(q, next, now)?;
        } else {
            self.complete(job.order, now);
            completed = true;
        }
        self.start_if_idle(q, m, now)?;
        if completed {
            self.release_check(q, now)?;
        }
        Ok(())
    }

    fn complete(&mut self, id: OrderId, now: SimTime) {
        let t = self.days(now);
        let mut o = self.orders.remove(&id).expect("completed order exists");
        o.completed_at = Some(now);
        let kind = self.cal.skus[o.sku].kind;
        self.ledger.change(t, wip_category(kind), -o.quantity);
        self.ledger.change(t, stock_category(kind), o.quantity);
        self.stock[o.sku] += o.quantity;
        self.completed_units[o.sku] += o.quantity;
        self.controller.on_complete(&o);
        if kind == SkuKind::Item && t >= self.warmup {
            if let Some(r) = o.released_at {
                self.item_lead_sum += t - self.days(r);
                self.item_lead_count += 1;
            }
        }
        if let Some(trace) = &mut self.trace {
            trace.orders.push(order_row(&o, self.mpd));
        }
        if kind == SkuKind::Item {
            self.deliver(o.sku, now);
        }
    }

    fn due(&mut self, id: u64, now: SimTime) {
        let Some(c) = self.customers.get(&id) else {
            return;
        };
        let (sku, qty, due) = (c.sku, c.order.quantity, c.order.due_day);
        if due >= self.warmup {
            self.due_in_window += 1;
        }
        let t = self.days(now);
        let before = self.deliveries[sku].backlog_units();
        self.deliveries[sku].order_due(id, qty, due);
        self.ledger.change(t, CostCategory::Tardiness, self.deliveries[sku].backlog_units() - before);
        self.deliver(sku, now);
    }

    fn deliver(&mut self, sku: usize, now: SimTime) {
        let t = self.days(now);
        let before = self.deliveries[sku].backlog_units();
        let shipped = self.deliveries[sku].deliver(&mut self.stock[sku], t);
        if shipped.is_empty() {
            return;
        }
        let qty: f64 = shipped.iter().map(|r| r.quantity).sum();
        self.ledger.change(t, CostCategory::Fgi, -qty);
        self.ledger.change(t, CostCategory::Tardiness, self.deliveries[sku].backlog_units() - before);
        for r in shipped {
            if r.due_day >= self.warmup && r.tardy_days <= 1e-9 {
                self.on_time_in_window += 1;
            }
            if let Some(mut c) = self.customers.remove(&r.order_id) {
                c.order.delivered_day = Some(r.delivered_day);
                if let Some(trace) = &mut self.trace {
                    trace.customers.push(customer_row(&c.order));
                }
            }
        }
    }

    fn audit(&self, now: SimTime) -> Result<()> {
        let fail = |what: String| Err(SimError::Invariant { at: now, what });
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * (1.0 + a.abs().max(b.abs()));
        let n = self.cal.skus.len();
        let mut in_process = vec![0.0; n];
        let mut loop_wip = [0.0; 2];
        for o in self.orders.values().filter(|o| o.is_released()) {
            in_process[o.sku] += o.quantity;
            if let Some(l) = o.loop_id {
                loop_wip[l as usize] += o.workload_minutes;
            }
        }
        let mut expected = [0.0; 5];
        for sku in 0..n {
            if self.stock[sku] < -1e-9 {
                return fail(format!("negative stock {} of sku {}", self.stock[sku], self.cal.skus[sku].id));
            }
            if !close(self.released_units[sku], in_process[sku] + self.completed_units[sku]) {
                return fail(format!("units of sku {} not conserved", self.cal.skus[sku].id));
            }
            let kind = self.cal.skus[sku].kind;
            expected[wip_category(kind) as usize] += in_process[sku];
            expected[stock_category(kind) as usize] += self.stock[sku];
            expected[CostCategory::Tardiness as usize] += self.deliveries[sku].backlog_units();
        }
        for c in CostCategory::ALL {
            if !close(self.ledger.level(c), expected[c as usize]) {
                return fail(format!(
                    "cost level {c:?} is {} but state gives {}",
                    self.ledger.level(c),
                    expected[c as usize]
                ));
            }
        }
        if let Some(loops) = self.controller.loops() {
            for (i, id) in [LoopId::Item, LoopId::Component].into_iter().enumerate() {
                if !close(loops.get(id).wip, loop_wip[i]) {
                    return fail(format!("loop {id:?} WIP {} but released workload {}", loops.get(id).wip, loop_wip[i]));
                }
            }
        }
        for m in &self.machines {
            if m.is_idle() && !m.queue.is_empty() {
                return fail(format!("machine {} idle with {} queued", m.name, m.queue.len()));
            }
        }
        Ok(())
    }
}

fn order_row(o: &ProductionOrder, mpd: f64) -> OrderTraceRow {
    OrderTraceRow {
        order: o.id.0,
        sku: o.sku_id.0,
        quantity: o.quantity,
        created_day: o.created_day,
        planned_start_day: o.planned_start_day,
        planned_end_day: o.planned_end_day,
        loop_id: o.loop_id,
        workload_minutes: o.workload_minutes,
        released: o.released_at.map(|t| t.as_days(mpd)),
        completed: o.completed_at.map(|t| t.as_days(mpd)),
    }
}

fn customer_row(c: &CustomerOrder) -> CustomerTraceRow {
    CustomerTraceRow {
        order: c.id,
        item: c.item.0,
        arrival_day: c.arrival_day,
        quantity: c.quantity,
        due_day: c.due_day,
        delivered_day: c.delivered_day,
    }
}

/// One replication of `scenario` under `params`, with all random streams
/// derived from `seed`.
pub struct Simulation {
    world: World,
    queue: EventQueue<EventKind>,
}

impl Simulation {
    pub fn new(scenario: &Scenario, params: &ControllerParams, seed: u64, options: SimOptions) -> Result<Self> {
        let cal = CalibratedScenario::calibrate(scenario)?;
        Self::from_calibrated(cal, params, seed, options)
    }

    pub fn from_calibrated(
        cal: CalibratedScenario,
        params: &ControllerParams,
        seed: u64,
        options: SimOptions,
    ) -> Result<Self> {
        params.validate(&cal.scenario.structure)?;
        let s = &cal.scenario;
        let mpd = s.minutes_per_day;
        let controller = Controller::new(params);
        let rule = options.dispatch.unwrap_or(match controller.ppcs() {
            Ppcs::Conwip => DispatchRule::Fisfo,
            _ => DispatchRule::Fifo,
        });
        let window = (s.warmup_days as f64 * mpd, s.horizon_days as f64 * mpd);
        let machines = cal
            .machines
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let mut m = Machine::new(i, name.clone(), rule, mpd);
                m.set_window(window.0, window.1);
                m
            })
            .collect();
        let n = cal.skus.len();
        let mut queue = EventQueue::new();
        queue.schedule(SimTime::ZERO, EventKind::PeriodStart)?;
        if s.warmup_days > 0 {
            queue.schedule(SimTime::day_start(s.warmup_days), EventKind::CostSampling)?;
        }
        queue.schedule(SimTime::day_start(s.horizon_days), EventKind::HorizonEnd)?;
        let world = World {
            options,
            mpd,
            controller,
            factory: OrderFactory::new(),
            demand: DemandGenerator::new(&cal, seed),
            times: OperationTimes::new(&cal, seed),
            machines,
            item_skus: cal.items().map(|(i, _)| i).collect(),
            orders: BTreeMap::new(),
            pending: BTreeSet::new(),
            stock: vec![0.0; n],
            customers: BTreeMap::new(),
            deliveries: vec![DeliveryBook::new(); n],
            next_customer: 0,
            ledger: CostLedger::new(),
            released_units: vec![0.0; n],
            completed_units: vec![0.0; n],
            period_starts: 0,
            finished: false,
            warmup: s.warmup_days as f64,
            released_in_window: 0,
            item_lead_sum: 0.0,
            item_lead_count: 0,
            due_in_window: 0,
            on_time_in_window: 0,
            trace: options.trace.then(Trace::default),
            cal,
        };
        Ok(Self { world, queue })
    }

    pub fn calibrated(&self) -> &CalibratedScenario {
        &self.world.cal
    }

    pub fn run(mut self) -> Result<SimOutput> {
        let horizon = self.world.cal.scenario.horizon_days;
        let world = &mut self.world;
        self.queue
            .run_until(SimTime::day_start(horizon), |q, ev| world.handle(q, ev.payload))?;
        let w = self.world;
        let s = &w.cal.scenario;
        let measured = s.measured_days() as f64;
        let reached = if w.finished { horizon as f64 } else { self.queue.now().as_days(w.mpd) };
        let integrals = *w.ledger.integrals();
        let diagnostics = Diagnostics {
            utilization: w
                .machines
                .iter()
                .map(|m| m.busy_minutes() / (measured * w.mpd))
                .collect(),
            on_time_fraction: if w.due_in_window == 0 {
                1.0
            } else {
                w.on_time_in_window as f64 / w.due_in_window as f64
            },
            mean_production_lead_time: if w.item_lead_count == 0 {
                0.0
            } else {
                w.item_lead_sum / w.item_lead_count as f64
            },
            mean_fgi_units: integrals[CostCategory::Fgi as usize] / measured,
            customer_orders_due: w.due_in_window,
            production_orders_released: w.released_in_window,
            events: self.queue.processed(),
        };
        let result = finalize(&integrals, &s.cost_rates, measured, reached, horizon as f64, diagnostics)?;
        let mut trace = w.trace;
        if let Some(t) = &mut trace {
            // open orders and customers at the horizon, for completeness
            t.orders.extend(w.orders.values().map(|o| order_row(o, w.mpd)));
            t.customers.extend(w.customers.values().map(|c| customer_row(&c.order)));
            t.orders.sort_by_key(|r| r.order);
            t.customers.sort_by_key(|r| r.order);
        }
        Ok(SimOutput {
            result,
            period_starts: w.period_starts,
            trace,
        })
    }
}

/// Runs one replication and returns its costs and diagnostics.
pub fn run_replication(scenario: &Scenario, params: &ControllerParams, seed: u64) -> Result<RunResult> {
    Ok(Simulation::new(scenario, params, seed, SimOptions::default())?.run()?.result)
}
