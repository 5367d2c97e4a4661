//! Comparison schedulers. All of them run at full speed, place one primary per task and
//! do not filter on deadlines; misses show up in the metrics instead.

use crate::model::{FogNode, Phase, Schedule, ScheduleEntry, Task};
use crate::slots::NodeSlots;

/// List-schedules `order` onto nodes picked by `choose`, each task at the earliest start its
/// chosen node allows. Tasks no node can host land in `failed`.
pub(crate) fn list_schedule(
    tasks: &[Task],
    nodes: &[FogNode],
    order: &[usize],
    mut choose: impl FnMut(usize, &Task, &[NodeSlots]) -> Option<usize>,
) -> Schedule {
    let mut slots: Vec<NodeSlots> = nodes.iter().map(NodeSlots::for_node).collect();
    let mut schedule = Schedule::empty(1.0);
    for (k, &ti) in order.iter().enumerate() {
        let task = &tasks[ti];
        let Some(j) = choose(k, task, &slots) else {
            schedule.failed.push(task.id);
            continue;
        };
        let node = &nodes[j];
        let start = slots[j]
            .earliest_start(task.npe, task.submit_time)
            .expect("chooser returns a node that can host the task");
        let exec = task.length as f64 / node.mips;
        slots[j].reserve(task.npe, start, start + exec);
        schedule.push(ScheduleEntry::new(
            task.id,
            node.id,
            start,
            exec,
            1.0,
            Phase::Primary,
        ));
    }
    schedule.cb = schedule.failed.len();
    schedule
}

pub(crate) fn submit_order(tasks: &[Task]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.sort_by(|&a, &b| {
        tasks[a]
            .submit_time
            .total_cmp(&tasks[b].submit_time)
            .then(tasks[a].id.cmp(&tasks[b].id))
    });
    order
}

fn earliest_available(nodes: &[FogNode], task: &Task, slots: &[NodeSlots]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (j, node) in nodes.iter().enumerate() {
        let Some(start) = slots[j].earliest_start(task.npe, task.submit_time) else {
            continue;
        };
        let replace = match best {
            None => true,
            Some((s, b)) => start < s || (start == s && node.id < nodes[b].id),
        };
        if replace {
            best = Some((start, j));
        }
    }
    best.map(|(_, j)| j)
}

/// First come, first served onto the node that can start the task soonest.
pub fn fcfs_schedule(tasks: &[Task], nodes: &[FogNode]) -> Schedule {
    let order = submit_order(tasks);
    list_schedule(tasks, nodes, &order, |_, t, s| {
        earliest_available(nodes, t, s)
    })
}

/// Shortest job first onto the node that can start the task soonest.
pub fn sjf_schedule(tasks: &[Task], nodes: &[FogNode]) -> Schedule {
    let mut order: Vec<usize> = (0..tasks.len()).collect();
    order.sort_by(|&a, &b| {
        tasks[a]
            .length
            .cmp(&tasks[b].length)
            .then(tasks[a].id.cmp(&tasks[b].id))
    });
    list_schedule(tasks, nodes, &order, |_, t, s| {
        earliest_available(nodes, t, s)
    })
}

/// Round robin: the k-th task in submission order goes to node `k mod |nodes|`, or the
/// next node after it that is large enough.
pub fn rr_schedule(tasks: &[Task], nodes: &[FogNode]) -> Schedule {
    let order = submit_order(tasks);
    let m = nodes.len();
    list_schedule(tasks, nodes, &order, |k, t, _| {
        (0..m)
            .map(|off| (k + off) % m)
            .find(|&j| nodes[j].can_host(t.npe))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NodeId, TaskId};

    fn starts(s: &Schedule) -> Vec<f64> {
        s.entries.iter().map(|e| e.start).collect()
    }

    fn node_of(s: &Schedule) -> Vec<u32> {
        s.entries.iter().map(|e| e.node_id.0).collect()
    }

    #[test]
    fn fcfs_spreads_over_idle_nodes() {
        let tasks = vec![Task::new(1, 1000, 0.0, 9.0), Task::new(2, 1000, 0.0, 9.0)];
        let nodes = vec![FogNode::new(1, 1000.0), FogNode::new(2, 1000.0)];
        let s = fcfs_schedule(&tasks, &nodes);
        assert_eq!(s.assignment[&TaskId(1)], NodeId(1));
        assert_eq!(s.assignment[&TaskId(2)], NodeId(2));
    }

    #[test]
    fn fcfs_queues_on_single_node() {
        let tasks: Vec<Task> = (0..4).map(|i| Task::new(i, 1000, 0.0, 1.0)).collect();
        let nodes = vec![FogNode::new(1, 1000.0)];
        let s = fcfs_schedule(&tasks, &nodes);
        assert_eq!(starts(&s), vec![0.0, 1.0, 2.0, 3.0]);
        assert!(s.failed.is_empty());
    }

    #[test]
    fn empty_input_gives_empty_schedule() {
        let nodes = vec![FogNode::new(1, 1000.0)];
        for s in [
            fcfs_schedule(&[], &nodes),
            sjf_schedule(&[], &nodes),
            rr_schedule(&[], &nodes),
        ] {
            assert!(s.entries.is_empty());
        }
    }

    #[test]
    fn sjf_orders_by_length() {
        let tasks = vec![
            Task::new(1, 1500, 0.0, 9.0),
            Task::new(2, 1000, 0.0, 9.0),
            Task::new(3, 2000, 0.0, 9.0),
        ];
        let nodes = vec![FogNode::new(1, 1000.0)];
        let s = sjf_schedule(&tasks, &nodes);
        let lengths: Vec<u64> = s
            .entries
            .iter()
            .map(|e| tasks.iter().find(|t| t.id == e.task_id).unwrap().length)
            .collect();
        assert_eq!(lengths, vec![1000, 1500, 2000]);
    }

    #[test]
    fn sjf_breaks_ties_by_id() {
        let tasks = vec![Task::new(3, 1000, 0.0, 9.0), Task::new(1, 1000, 0.0, 9.0)];
        let nodes = vec![FogNode::new(1, 1000.0)];
        let ids: Vec<u32> = sjf_schedule(&tasks, &nodes)
            .entries
            .iter()
            .map(|e| e.task_id.0)
            .collect();
        assert_eq!(ids, vec![1, 3]);
    }

    #[test]
    fn single_task_sjf_equals_fcfs() {
        let tasks = vec![Task::new(1, 1234, 0.3, 9.0)];
        let nodes = vec![FogNode::new(1, 1000.0), FogNode::new(2, 1800.0)];
        assert_eq!(sjf_schedule(&tasks, &nodes), fcfs_schedule(&tasks, &nodes));
    }

    #[test]
    fn rr_cycles_nodes() {
        let tasks: Vec<Task> = (0..4).map(|i| Task::new(i, 1000, 0.0, 9.0)).collect();
        let nodes = vec![FogNode::new(0, 1000.0), FogNode::new(1, 1000.0)];
        assert_eq!(node_of(&rr_schedule(&tasks, &nodes)), vec![0, 1, 0, 1]);

        let three: Vec<Task> = (0..3).map(|i| Task::new(i, 1000, 0.0, 9.0)).collect();
        let nodes3: Vec<FogNode> = (0..3).map(|i| FogNode::new(i, 1000.0)).collect();
        let s = rr_schedule(&three, &nodes3);
        assert_eq!(node_of(&s), vec![0, 1, 2]);
        assert_eq!(starts(&s), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn rr_on_one_node_is_fcfs() {
        let tasks: Vec<Task> = (0..5)
            .map(|i| Task::new(i, 1000 + 100 * i as u64, 0.2 * i as f64, 9.0).with_npe(1 + i % 2))
            .collect();
        let nodes = vec![FogNode::new(0, 1300.0).with_slots(3)];
        assert_eq!(rr_schedule(&tasks, &nodes), fcfs_schedule(&tasks, &nodes));
    }

    #[test]
    fn unhostable_task_fails() {
        let tasks = vec![Task::new(1, 1000, 0.0, 9.0).with_npe(5)];
        let nodes = vec![FogNode::new(0, 1000.0).with_slots(4)];
        for s in [
            fcfs_schedule(&tasks, &nodes),
            sjf_schedule(&tasks, &nodes),
            rr_schedule(&tasks, &nodes),
        ] {
            assert_eq!(s.failed, vec![TaskId(1)]);
            assert_eq!(s.cb, 1);
            assert!(s.entries.is_empty());
        }
    }

    #[test]
    fn one_entry_per_task_at_full_speed() {
        let tasks: Vec<Task> = (0..20)
            .map(|i| {
                Task::new(i, 1000 + 50 * i as u64, 0.1 * (i % 7) as f64, 3.0).with_npe(1 + i % 3)
            })
            .collect();
        let nodes: Vec<FogNode> = (0..3)
            .map(|i| FogNode::new(i, 1000.0 + 400.0 * i as f64).with_slots(3))
            .collect();
        for s in [
            fcfs_schedule(&tasks, &nodes),
            sjf_schedule(&tasks, &nodes),
            rr_schedule(&tasks, &nodes),
        ] {
            assert_eq!(s.entries.len(), tasks.len());
            assert!(s
                .entries
                .iter()
                .all(|e| e.rho == 1.0 && e.phase == Phase::Primary));
            for t in &tasks {
                assert_eq!(s.entries.iter().filter(|e| e.task_id == t.id).count(), 1);
            }
        }
    }
}
