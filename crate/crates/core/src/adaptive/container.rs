use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::rules::{PairResult, Rectangle};

/// Neumaier-compensated running sum. The error ledger sees millions of
/// `+=`/`-=` updates whose early terms dwarf the final total.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// One family member restricted to one subdomain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    /// Member index in the family.
    pub id: usize,
    pub domain: Rectangle,
    pub val_n: f64,
    pub val_2n: f64,
    /// `|val_n - val_2n|`.
    pub err: f64,
}

impl Task {
    pub fn from_pair(id: usize, domain: Rectangle, r: &PairResult) -> Self {
        Task {
            id,
            domain,
            val_n: r.q_coarse,
            val_2n: r.q_fine,
            err: r.err,
        }
    }
}

#[derive(Debug, Clone)]
struct Entry {
    task: Task,
    seq: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Largest error first; among equal errors the older entry wins.
    fn cmp(&self, other: &Self) -> Ordering {
        self.task
            .err
            .total_cmp(&other.task.err)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Max-heap of tasks keyed on their error, plus the global error ledger.
///
/// Extraction does not touch the ledger: the errors of extracted tasks stay
/// accounted for until [`TaskContainer::commit`] swaps them for the errors
/// of their children.
#[derive(Debug, Clone, Default)]
pub struct TaskContainer {
    heap: BinaryHeap<Entry>,
    next_seq: u64,
    global_err: CompensatedSum,
    total_value: CompensatedSum,
}

impl TaskContainer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build a heap from a batch of tasks in one heapify pass.
    pub fn from_tasks<I: IntoIterator<Item = Task>>(tasks: I) -> Self {
        let mut c = TaskContainer::new();
        let mut entries = Vec::new();
        for task in tasks {
            c.global_err.add(task.err);
            c.total_value.add(task.val_2n);
            entries.push(Entry {
                task,
                seq: c.next_seq,
            });
            c.next_seq += 1;
        }
        c.heap = BinaryHeap::from(entries);
        c
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Running sum of task errors, including tasks extracted but not yet committed.
    pub fn global_err(&self) -> f64 {
        self.global_err.value()
    }

    /// Running sum of fine-rule values, with the same accounting as [`Self::global_err`].
    pub fn total_value_fine(&self) -> f64 {
        self.total_value.value()
    }

    /// Error of the task that would be extracted next.
    pub fn peek_err(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.task.err)
    }

    pub fn insert(&mut self, task: Task) {
        self.global_err.add(task.err);
        self.total_value.add(task.val_2n);
        self.push_unaccounted(task);
    }

    fn push_unaccounted(&mut self, task: Task) {
        self.heap.push(Entry {
            task,
            seq: self.next_seq,
        });
        self.next_seq += 1;
    }

    /// Remove up to `max_task` tasks in non-increasing error order.
    pub fn extract_bulk(&mut self, max_task: usize) -> Vec<Task> {
        let mut out = Vec::with_capacity(max_task.min(self.heap.len()));
        self.extract_bulk_into(max_task, &mut out);
        out
    }

    pub(crate) fn extract_bulk_into(&mut self, max_task: usize, out: &mut Vec<Task>) {
        out.clear();
        while out.len() < max_task {
            match self.heap.pop() {
                Some(e) => out.push(e.task),
                None => break,
            }
        }
    }

    /// Replace `parents` by `children` in the ledger and insert the children.
    /// Returns the updated global error.
    pub fn commit(&mut self, parents: &[Task], children: &[Task]) -> f64 {
        for p in parents {
            self.global_err.add(-p.err);
            self.total_value.add(-p.val_2n);
        }
        for &c in children {
            self.insert(c);
        }
        self.global_err()
    }

    /// Contained tasks in unspecified (but deterministic) order.
    pub fn tasks(&self) -> impl Iterator<Item = &Task> {
        self.heap.iter().map(|e| &e.task)
    }

    /// Full re-summation of the contained errors.
    pub fn resum_err(&self) -> f64 {
        let mut s = CompensatedSum::default();
        for t in self.tasks() {
            s.add(t.err);
        }
        s.value()
    }

    pub fn resum_value(&self) -> f64 {
        let mut s = CompensatedSum::default();
        for t in self.tasks() {
            s.add(t.val_2n);
        }
        s.value()
    }

    /// Reset the running ledger to a full re-summation. Only valid when no
    /// task is outside the container.
    pub(crate) fn resync(&mut self) {
        let mut e = CompensatedSum::default();
        e.add(self.resum_err());
        let mut v = CompensatedSum::default();
        v.add(self.resum_value());
        self.global_err = e;
        self.total_value = v;
    }

    pub fn into_tasks(self) -> Vec<Task> {
        self.heap.into_vec().into_iter().map(|e| e.task).collect()
    }
}
