use std::collections::{HashMap, VecDeque};
use std::sync::{Condvar, Mutex, MutexGuard};

use crate::backend::DeviceId;

/// Identifies one lease; only the holder may release its device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HolderId(u64);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PoolError {
    #[error("device pool needs at least one device")]
    Empty,
    #[error("duplicate device id {0}")]
    Duplicate(DeviceId),
    #[error("release of {device} by a holder that does not own it")]
    NotHolder { device: DeviceId },
}

#[derive(Debug, Default)]
struct State {
    free: VecDeque<DeviceId>,
    holders: HashMap<DeviceId, HolderId>,
    /// Tickets of blocked callers, oldest first.
    waiting: VecDeque<u64>,
    next_ticket: u64,
    next_holder: u64,
    peak: usize,
    granted: u64,
}

/// Exclusive leasing of computational units with FIFO fairness among
/// waiters.
#[derive(Debug)]
pub struct DevicePool {
    devices: Vec<DeviceId>,
    state: Mutex<State>,
    available: Condvar,
}

impl DevicePool {
    pub fn new(devices: impl IntoIterator<Item = DeviceId>) -> Result<Self, PoolError> {
        let devices: Vec<DeviceId> = devices.into_iter().collect();
        if devices.is_empty() {
            return Err(PoolError::Empty);
        }
        for (i, d) in devices.iter().enumerate() {
            if devices[..i].contains(d) {
                return Err(PoolError::Duplicate(d.clone()));
            }
        }
        Ok(DevicePool {
            state: Mutex::new(State {
                free: devices.iter().cloned().collect(),
                ..State::default()
            }),
            devices,
            available: Condvar::new(),
        })
    }

    /// Pool of `n` devices named `"0"`, `"1"`, ...
    pub fn with_count(n: usize) -> Result<Self, PoolError> {
        Self::new((0..n).map(|i| DeviceId::new(i.to_string())))
    }

    pub fn devices(&self) -> &[DeviceId] {
        &self.devices
    }

    pub fn size(&self) -> usize {
        self.devices.len()
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().expect("device pool poisoned")
    }

    /// Blocks until a device is free and this caller is first in line.
    pub fn lease(&self) -> Lease<'_> {
        let mut st = self.lock();
        let ticket = st.next_ticket;
        st.next_ticket += 1;
        st.waiting.push_back(ticket);
        while st.waiting.front() != Some(&ticket) || st.free.is_empty() {
            st = self.available.wait(st).expect("device pool poisoned");
        }
        st.waiting.pop_front();
        let device = st.free.pop_front().expect("checked non-empty");
        let holder = HolderId(st.next_holder);
        st.next_holder += 1;
        st.holders.insert(device.clone(), holder);
        st.granted += 1;
        st.peak = st.peak.max(st.holders.len());
        let more = !st.free.is_empty() && !st.waiting.is_empty();
        drop(st);
        if more {
            self.available.notify_all();
        }
        Lease {
            pool: self,
            device,
            holder,
            active: true,
        }
    }

    /// Returns `device` to the pool. Fails unless `holder` owns it.
    pub fn release(&self, device: &DeviceId, holder: HolderId) -> Result<(), PoolError> {
        let mut st = self.lock();
        match st.holders.get(device) {
            Some(h) if *h == holder => {
                st.holders.remove(device);
                st.free.push_back(device.clone());
                drop(st);
                self.available.notify_all();
                Ok(())
            }
            _ => Err(PoolError::NotHolder { device: device.clone() }),
        }
    }

    pub fn outstanding(&self) -> usize {
        self.lock().holders.len()
    }

    /// Highest number of simultaneous leases observed.
    pub fn peak_outstanding(&self) -> usize {
        self.lock().peak
    }

    pub fn leases_granted(&self) -> u64 {
        self.lock().granted
    }
}

/// An active lease; the device returns to the pool on drop.
#[derive(Debug)]
pub struct Lease<'a> {
    pool: &'a DevicePool,
    device: DeviceId,
    holder: HolderId,
    active: bool,
}

impl Lease<'_> {
    pub fn device(&self) -> &DeviceId {
        &self.device
    }

    pub fn holder(&self) -> HolderId {
        self.holder
    }

    pub fn release(mut self) -> Result<(), PoolError> {
        self.active = false;
        self.pool.release(&self.device, self.holder)
    }
}

impl Drop for Lease<'_> {
    fn drop(&mut self) {
        if self.active {
            let _ = self.pool.release(&self.device, self.holder);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;
    use std::thread;
    use std::time::Duration;

    #[test]
    fn empty_and_duplicate_pools_rejected() {
        assert_eq!(DevicePool::new([]).unwrap_err(), PoolError::Empty);
        assert!(matches!(
            DevicePool::new([DeviceId::new("a"), DeviceId::new("a")]),
            Err(PoolError::Duplicate(_))
        ));
    }

    #[test]
    fn release_by_non_holder_is_an_error() {
        let pool = DevicePool::with_count(2).unwrap();
        let a = pool.lease();
        let b = pool.lease();
        let err = pool.release(a.device(), b.holder()).unwrap_err();
        assert!(matches!(err, PoolError::NotHolder { .. }));
        assert_eq!(pool.outstanding(), 2);
        a.release().unwrap();
        b.release().unwrap();
        assert_eq!(pool.outstanding(), 0);
    }

    #[test]
    fn release_then_lease_reuses_device() {
        let pool = DevicePool::with_count(1).unwrap();
        let first = pool.lease();
        let dev = first.device().clone();
        first.release().unwrap();
        assert_eq!(pool.lease().device(), &dev);
    }

    #[test]
    fn single_device_serializes() {
        let pool = Arc::new(DevicePool::with_count(1).unwrap());
        let inside = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..2)
            .map(|_| {
                let pool = Arc::clone(&pool);
                let inside = Arc::clone(&inside);
                thread::spawn(move || {
                    let _lease = pool.lease();
                    assert_eq!(inside.fetch_add(1, Ordering::SeqCst), 0);
                    thread::sleep(Duration::from_millis(20));
                    inside.fetch_sub(1, Ordering::SeqCst);
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert_eq!(pool.peak_outstanding(), 1);
        assert_eq!(pool.leases_granted(), 2);
    }

    #[test]
    fn waiters_are_served_in_arrival_order() {
        let pool = Arc::new(DevicePool::with_count(1).unwrap());
        let order = Arc::new(Mutex::new(Vec::new()));
        let held = pool.lease();
        let mut handles = Vec::new();
        for i in 0..4 {
            let worker_pool = Arc::clone(&pool);
            let order = Arc::clone(&order);
            handles.push(thread::spawn(move || {
                let _l = worker_pool.lease();
                order.lock().unwrap().push(i);
            }));
            // let thread i enqueue before i + 1
            while pool.lock().waiting.len() < i + 1 {
                thread::yield_now();
            }
        }
        drop(held);
        for h in handles {
            h.join().unwrap();
        }
        assert_eq!(*order.lock().unwrap(), vec![0, 1, 2, 3]);
    }
}
